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

#include "dopplertag/tag_engine.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "dopplertag/cluster_rows.h"
#include "dopplertag/errors.h"

namespace dopplertag::tag {

void SessionConfig::Validate() const {
  if (!(fov > 0.0 && fov < std::numbers::pi)) throw ConfigError("session.fov out of range");
  if (!(v_sender_a > 0.0)) throw ConfigError("session.v_sender_a must be positive");
  if (v_sender_b && !(*v_sender_b > 0.0)) throw ConfigError("session.v_sender_b must be positive");
  if (MultiRow() && (!(distance_l > 0.0) || !(distance_w > 0.0))) {
    throw ConfigError("session: L and W must be positive for two sweeps");
  }
  std::set<std::string> seen;
  for (const auto& m : group_members) {
    if (m.empty() || !seen.insert(m).second) {
      throw ConfigError("session.group_members: empty or duplicate name '" + m + "'");
    }
  }
  if (!(reply_timeout > 0.0)) throw ConfigError("session.reply_timeout must be positive");
  if (k_rows && *k_rows < 1) throw ConfigError("session.k_rows must be >= 1");
  if (k_max < 1) throw ConfigError("session.k_max must be >= 1");
  if (!(affinity_scale > 0.0)) throw ConfigError("session.affinity_scale must be positive");
}

// ---- Bus ----

void MessageBus::Activate(SweepId sweep, const std::vector<std::string>& members) {
  std::lock_guard lock(mu_);
  active_[sweep] = members;
}

bool MessageBus::IsActive(SweepId sweep) const {
  std::lock_guard lock(mu_);
  return active_.count(sweep) > 0;
}

void MessageBus::SetFault(const std::string& name, LinkFault fault) {
  std::lock_guard lock(mu_);
  faults_[name] = fault;
}

void MessageBus::SetFailed(bool failed) {
  std::lock_guard lock(mu_);
  failed_ = failed;
}

void MessageBus::Send(const ReplyMessage& reply, double send_time) {
  std::lock_guard lock(mu_);
  auto it = faults_.find(reply.name);
  const LinkFault fault = it == faults_.end() ? LinkFault{} : it->second;
  if (fault.drop) return;
  queue_.push_back({send_time + fault.delay, reply});
}

std::vector<MessageBus::Delivery> MessageBus::Receive(SweepId sweep,
                                                      double deadline) const {
  std::lock_guard lock(mu_);
  if (failed_) throw SessionError("reply transport failed");
  std::vector<Delivery> out;
  for (const auto& d : queue_) {
    if (d.reply.sweep == sweep && d.arrival <= deadline) out.push_back(d);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Delivery& a, const Delivery& b) { return a.arrival < b.arrival; });
  return out;
}

// ---- Sender ----

Collection CollectReplies(const MessageBus& bus, SweepId sweep,
                          const std::vector<std::string>& members, double timeout) {
  if (!bus.IsActive(sweep)) {
    throw PreconditionError("collect_replies: sweep " + std::string(ToString(sweep)) +
                            " was not activated");
  }
  const std::set<std::string> group(members.begin(), members.end());
  std::set<std::string> seen;
  Collection out;
  for (const auto& d : bus.Receive(sweep, timeout)) {
    const std::string& name = d.reply.name;
    if (!group.count(name)) {
      out.warnings.push_back("ignored reply from non-member '" + name + "'");
      continue;
    }
    if (!seen.insert(name).second) {
      out.warnings.push_back("duplicate reply from '" + name + "' on sweep " +
                             std::string(ToString(sweep)) + " rejected");
      continue;
    }
    out.replies.push_back(d.reply);
  }
  for (const auto& m : members) {
    if (!seen.count(m)) out.no_reply.push_back(m);
  }
  return out;
}

Screening ScreenFov(const std::vector<ReplyMessage>& replies, double v_sender,
                    const SessionConfig& config) {
  if (!(v_sender > 0.0)) throw PreconditionError("screen_fov: sender speed must be positive");
  Screening out;
  const double f0 = config.tone_frequency;
  for (const auto& r : replies) {
    if (!r.detected) {
      out.excluded[r.name] = ExclusionReason::kToneNotDetected;
      continue;
    }
    geometry::AngleResult angle;
    try {
      angle = geometry::AngleFromShift(f0 + r.delta_f, f0, config.sound_speed, v_sender);
    } catch (const InconsistentMeasurement&) {
      out.excluded[r.name] = ExclusionReason::kInconsistent;
      continue;
    }
    out.angles[r.name] = angle.SignedAlpha();
    if (geometry::InFov(angle.alpha, config.fov)) {
      out.included.push_back({r, angle});
    } else {
      out.excluded[r.name] = ExclusionReason::kOutOfFov;
    }
  }
  return out;
}

Ordering OrderSingleRow(const std::vector<ScreenedReply>& included) {
  std::vector<const ScreenedReply*> sorted;
  for (const auto& s : included) sorted.push_back(&s);
  std::sort(sorted.begin(), sorted.end(), [](const ScreenedReply* a, const ScreenedReply* b) {
    if (a->reply.delta_f != b->reply.delta_f) return a->reply.delta_f > b->reply.delta_f;
    return a->reply.name < b->reply.name;
  });
  Ordering out;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    out.names.push_back(sorted[i]->reply.name);
    if (i > 0 && sorted[i]->reply.delta_f == sorted[i - 1]->reply.delta_f) {
      out.warnings.push_back("equal shifts for '" + sorted[i - 1]->reply.name + "' and '" +
                             sorted[i]->reply.name + "'; order below resolution");
    }
  }
  return out;
}

Localization LocalizeMultiRow(const std::vector<ScreenedReply>& included_a,
                              const std::vector<ReplyMessage>& replies_b,
                              const SessionConfig& config) {
  if (!config.MultiRow()) throw PreconditionError("localize_multi_row: no second sweep");
  const double f0 = config.tone_frequency;
  std::map<std::string, const ReplyMessage*> by_name;
  for (const auto& r : replies_b) by_name.emplace(r.name, &r);
  Localization out;
  for (const auto& a : included_a) {
    const std::string& name = a.reply.name;
    auto it = by_name.find(name);
    if (it == by_name.end()) {
      out.excluded[name] = ExclusionReason::kNoReply;
      continue;
    }
    if (!it->second->detected) {
      out.excluded[name] = ExclusionReason::kToneNotDetected;
      continue;
    }
    try {
      const auto b = geometry::AngleFromShift(f0 + it->second->delta_f, f0,
                                              config.sound_speed, *config.v_sender_b);
      const auto p = geometry::IntersectTwoSweeps(a.angle.SignedAlpha(), b.SignedAlpha(),
                                                  config.distance_l, config.distance_w);
      out.coordinates[name] = {-p.x, config.distance_l - p.y};
    } catch (const InconsistentMeasurement&) {
      out.excluded[name] = ExclusionReason::kInconsistent;
    } catch (const DegenerateGeometry&) {
      out.excluded[name] = ExclusionReason::kInconsistent;
    }
  }
  return out;
}

TagLayout BuildLayout(const std::map<std::string, geometry::PlanarPoint>& coordinates,
                      std::optional<int> k_rows, double affinity_scale, int k_max) {
  TagLayout layout;
  if (coordinates.empty()) return layout;
  std::vector<std::string> names;
  std::vector<double> depths;
  for (const auto& [name, p] : coordinates) {
    names.push_back(name);
    depths.push_back(p.y);
  }
  const int n = static_cast<int>(names.size());
  std::optional<int> k = k_rows;
  if (k) k = std::min(*k, n);
  const auto rows = cluster::ClusterRows(depths, k, affinity_scale, std::min(k_max, n));
  if (!rows.converged) layout.warnings.push_back("row clustering did not converge");
  layout.rows.resize(rows.row_means.size());
  for (int i = 0; i < n; ++i) layout.rows[rows.labels[i]].push_back(names[i]);
  for (auto& row : layout.rows) {
    std::stable_sort(row.begin(), row.end(), [&](const std::string& a, const std::string& b) {
      return coordinates.at(a).x < coordinates.at(b).x;
    });
  }
  layout.coordinates = coordinates;
  return layout;
}

TagLayout BuildLayout(const Ordering& single_row) {
  TagLayout layout;
  if (!single_row.names.empty()) layout.rows.push_back(single_row.names);
  layout.warnings = single_row.warnings;
  return layout;
}

TagLayout RunSender(const MessageBus& bus, const SessionConfig& config) {
  config.Validate();
  const auto& members = config.group_members;
  Collection a = CollectReplies(bus, SweepId::kA, members, config.reply_timeout);
  Screening screened = ScreenFov(a.replies, config.v_sender_a, config);

  TagLayout layout;
  std::vector<std::string> warnings = a.warnings;
  if (config.MultiRow()) {
    Collection b = CollectReplies(bus, SweepId::kB, members, config.reply_timeout);
    warnings.insert(warnings.end(), b.warnings.begin(), b.warnings.end());
    Localization loc = LocalizeMultiRow(screened.included, b.replies, config);
    layout = BuildLayout(loc.coordinates, config.k_rows, config.affinity_scale, config.k_max);
    for (const auto& [name, why] : loc.excluded) layout.excluded[name] = why;
  } else {
    layout = BuildLayout(OrderSingleRow(screened.included));
  }
  for (const auto& name : a.no_reply) layout.excluded[name] = ExclusionReason::kNoReply;
  for (const auto& [name, why] : screened.excluded) layout.excluded[name] = why;
  layout.angles = screened.angles;
  warnings.insert(warnings.end(), layout.warnings.begin(), layout.warnings.end());
  layout.warnings = std::move(warnings);
  return layout;
}

}  // namespace dopplertag::tag
