// Copyright 2026 The Dopplertag Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Sender side of a tagging session: reply collection over an in-process bus,
// FOV screening, single-row ordering and two-sweep localization.

#ifndef DOPPLERTAG_TAG_ENGINE_H_
#define DOPPLERTAG_TAG_ENGINE_H_

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "dopplertag/geometry.h"
#include "dopplertag/layout.h"

namespace dopplertag::tag {

inline constexpr double kSessionAffinityScale = 0.5;  // m

struct ReplyMessage {
  std::string name;
  double delta_f = 0.0;  // Hz
  SweepId sweep = SweepId::kA;
  bool degraded = false;
  bool detected = true;  // false: the receiver heard no tone
};

struct SessionConfig {
  double fov = geometry::DegToRad(70.0);
  double sound_speed = geometry::kDefaultSoundSpeed;
  double tone_frequency = geometry::kDefaultToneFrequency;
  double v_sender_a = 3.4;                 // measured peak speed, sweep A
  std::optional<double> v_sender_b;        // set for two-sweep sessions
  double distance_l = 0.0;                 // multi-row only
  double distance_w = 0.0;
  std::vector<std::string> group_members;
  double reply_timeout = 2.0;              // s
  std::optional<int> k_rows;               // nullopt: eigengap estimate
  int k_max = 5;
  double affinity_scale = kSessionAffinityScale;

  bool MultiRow() const { return v_sender_b.has_value(); }
  // Throws ConfigError.
  void Validate() const;
};

struct LinkFault {
  double delay = 0.0;  // s added to the send time
  bool drop = false;
};

// In-process stand-in for the ad-hoc network. Sends may arrive from any
// thread; time is virtual, so timeouts compare arrival stamps.
class MessageBus {
 public:
  void Activate(SweepId sweep, const std::vector<std::string>& members);
  bool IsActive(SweepId sweep) const;
  void SetFault(const std::string& name, LinkFault fault);
  void SetFailed(bool failed);

  void Send(const ReplyMessage& reply, double send_time = 0.0);

  struct Delivery {
    double arrival = 0.0;
    ReplyMessage reply;
  };
  // Deliveries for `sweep` arriving no later than `deadline`, in arrival
  // order (ties keep send order). Throws SessionError after SetFailed(true).
  std::vector<Delivery> Receive(SweepId sweep, double deadline) const;

 private:
  mutable std::mutex mu_;
  std::map<SweepId, std::vector<std::string>> active_;
  std::map<std::string, LinkFault> faults_;
  std::vector<Delivery> queue_;
  bool failed_ = false;
};

struct Collection {
  std::vector<ReplyMessage> replies;
  std::vector<std::string> no_reply;
  std::vector<std::string> warnings;
};

// First reply per name wins; later duplicates and non-members are dropped
// with a warning. Throws PreconditionError if the sweep was never activated.
Collection CollectReplies(const MessageBus& bus, SweepId sweep,
                          const std::vector<std::string>& members, double timeout);

struct ScreenedReply {
  ReplyMessage reply;
  geometry::AngleResult angle;
};

struct Screening {
  std::vector<ScreenedReply> included;
  std::map<std::string, ExclusionReason> excluded;
  std::map<std::string, double> angles;  // signed alpha for every consistent reply
};

Screening ScreenFov(const std::vector<ReplyMessage>& replies, double v_sender,
                    const SessionConfig& config);

struct Ordering {
  std::vector<std::string> names;
  std::vector<std::string> warnings;
};

// Descending delta_f = left to right. Equal shifts fall back to name order
// and raise a warning.
Ordering OrderSingleRow(const std::vector<ScreenedReply>& included);

struct Localization {
  std::map<std::string, geometry::PlanarPoint> coordinates;  // picture frame
  std::map<std::string, ExclusionReason> excluded;
};

// Sweep A decides membership (already screened); sweep B only localizes.
Localization LocalizeMultiRow(const std::vector<ScreenedReply>& included_a,
                              const std::vector<ReplyMessage>& replies_b,
                              const SessionConfig& config);

// Multi-row layout: depth clustering, rows front to back, each row sorted by
// lateral offset.
TagLayout BuildLayout(const std::map<std::string, geometry::PlanarPoint>& coordinates,
                      std::optional<int> k_rows, double affinity_scale, int k_max);
TagLayout BuildLayout(const Ordering& single_row);

// Full sender flow over replies already on the bus.
TagLayout RunSender(const MessageBus& bus, const SessionConfig& config);

}  // namespace dopplertag::tag

#endif  // DOPPLERTAG_TAG_ENGINE_H_
