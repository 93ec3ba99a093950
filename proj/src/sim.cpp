#include "neurokey/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "neurokey/errors.hpp"
#include "neurokey/rng.hpp"

namespace neurokey::sim {

const char* to_string(UavMode mode) {
  switch (mode) {
    case UavMode::EnRoute: return "EnRoute";
    case UavMode::Hovering: return "Hovering";
    case UavMode::ReturningToLaunch: return "ReturningToLaunch";
    case UavMode::Home: return "Home";
    case UavMode::AwaitingRekey: return "AwaitingRekey";
  }
  return "?";
}

const char* to_string(NodeId node) {
  switch (node) {
    case NodeId::Gcs: return "Gcs";
    case NodeId::Uav: return "Uav";
    case NodeId::Attacker: return "Attacker";
  }
  return "?";
}

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::FrameSent: return "FrameSent";
    case EventKind::FrameDelivered: return "FrameDelivered";
    case EventKind::ForeignDetected: return "ForeignDetected";
    case EventKind::GpsLocked: return "GpsLocked";
    case EventKind::RtlEngaged: return "RtlEngaged";
    case EventKind::KeyChangeRequested: return "KeyChangeRequested";
    case EventKind::Rekeyed: return "Rekeyed";
    case EventKind::WaypointReached: return "WaypointReached";
    case EventKind::MissionComplete: return "MissionComplete";
    case EventKind::ReturnedHome: return "ReturnedHome";
  }
  return "?";
}

const char* to_string(ScenarioVerdict verdict) {
  switch (verdict) {
    case ScenarioVerdict::MissionComplete: return "MissionComplete";
    case ScenarioVerdict::ReturnedHome: return "ReturnedHome";
    case ScenarioVerdict::Timeout: return "Timeout";
  }
  return "?";
}

void ScenarioConfig::validate() const {
  if (waypoints.empty()) throw ConfigError("scenario: at least one waypoint required");
  for (const auto& wp : waypoints)
    if (!std::isfinite(wp.x) || !std::isfinite(wp.y))
      throw ConfigError("scenario: waypoint coordinates must be finite");
  if (!std::isfinite(home_x) || !std::isfinite(home_y))
    throw ConfigError("scenario: home coordinates must be finite");
  if (!(tick_seconds > 0) || !(speed_mps > 0))
    throw ConfigError("scenario: tick_seconds and speed_mps must be positive");
  if (max_ticks < 1) throw ConfigError("scenario: max_ticks must be >= 1");
  if (addr_gcs == addr_uav || addr_gcs == addr_attacker || addr_uav == addr_attacker)
    throw ConfigError("scenario: node addresses must be distinct");
  if (addr_gcs == 0xFFFF || addr_uav == 0xFFFF || addr_attacker == 0xFFFF)
    throw ConfigError("scenario: 0xFFFF is reserved for broadcast");
  if (attack.trigger == AttackConfig::Trigger::AfterWaypoint &&
      (attack.value < 1 || attack.value > waypoints.size()))
    throw ConfigError("scenario: attack waypoint index out of range");
  if (policy == Policy::Rekey && eeg_record_file.empty())
    throw ConfigError("scenario: rekey policy requires eeg_record_file");
}

ScenarioConfig ScenarioConfig::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("scenario json: ") + e.what());
  }
  try {
    ScenarioConfig cfg;
    cfg.tick_seconds = j.value("tick_seconds", cfg.tick_seconds);
    cfg.max_ticks = j.value("max_ticks", cfg.max_ticks);
    if (!j.contains("waypoints") || !j["waypoints"].is_array())
      throw ParseError("scenario json: waypoints array required");
    uint16_t idx = 1;
    for (const auto& w : j["waypoints"])
      cfg.waypoints.push_back({w.at("x").get<double>(), w.at("y").get<double>(), idx++});
    if (j.contains("home")) {
      cfg.home_x = j["home"].value("x", 0.0);
      cfg.home_y = j["home"].value("y", 0.0);
    }
    cfg.speed_mps = j.value("speed_mps", cfg.speed_mps);
    std::string policy = j.value("policy", "rtl");
    if (policy == "rtl") cfg.policy = Policy::Rtl;
    else if (policy == "rekey") cfg.policy = Policy::Rekey;
    else throw ParseError("scenario json: policy must be 'rtl' or 'rekey'");
    cfg.link_delay_ticks = j.value("link_delay_ticks", cfg.link_delay_ticks);
    if (j.contains("addresses")) {
      const auto& a = j["addresses"];
      cfg.addr_gcs = a.value("gcs", cfg.addr_gcs);
      cfg.addr_uav = a.value("uav", cfg.addr_uav);
      cfg.addr_attacker = a.value("attacker", cfg.addr_attacker);
    }
    if (j.contains("attack")) {
      const auto& a = j["attack"];
      std::string trig = a.value("trigger", "none");
      if (trig == "after_waypoint") cfg.attack.trigger = AttackConfig::Trigger::AfterWaypoint;
      else if (trig == "at_tick") cfg.attack.trigger = AttackConfig::Trigger::AtTick;
      else if (trig == "none") cfg.attack.trigger = AttackConfig::Trigger::None;
      else throw ParseError("scenario json: unknown attack trigger");
      cfg.attack.value = a.value("value", uint64_t(0));
    }
    cfg.enrollment_file = j.value("enrollment_file", "");
    cfg.eeg_record_file = j.value("eeg_record_file", "");
    if (j.contains("seeds"))
      for (const auto& [k, v] : j["seeds"].items())
        cfg.seeds[k] = v.get<uint64_t>();
    cfg.validate();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("scenario json: ") + e.what());
  }
}

ScenarioConfig ScenarioConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json_text(text);
}

uint64_t liveness_tick_bound(const ScenarioConfig& config) {
  double len = 0.0;
  double px = config.home_x, py = config.home_y;
  for (const auto& wp : config.waypoints) {
    len += std::hypot(wp.x - px, wp.y - py);
    px = wp.x;
    py = wp.y;
  }
  double step = config.speed_mps * config.tick_seconds;
  return uint64_t(std::ceil(len / step)) + config.waypoints.size() +
         config.link_delay_ticks + 2;
}

void EventLog::emit(uint64_t tick, NodeId node, EventKind kind, std::string detail) {
  events_.push_back({tick, node, kind, std::move(detail), seq_++});
}

namespace {

std::string addr_str(uint16_t addr) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "0x%04x", addr);
  return buf;
}

constexpr double kArrivalRadius = 0.5;

void move_toward(UavKinematics& kin, double tx, double ty, double step) {
  double dx = tx - kin.x;
  double dy = ty - kin.y;
  double dist = std::hypot(dx, dy);
  if (dist <= step) {
    kin.x = tx;
    kin.y = ty;
  } else {
    kin.x += step * dx / dist;
    kin.y += step * dy / dist;
  }
}

}  // namespace

UavNode::UavNode(Policy policy, UavKinematics kinematics, uint16_t gcs_addr)
    : kin_(kinematics), gcs_addr_(gcs_addr) {
  state_.policy = policy;
  state_.mode = UavMode::Hovering;
}

void UavNode::refresh_navigation() {
  if (state_.mode == UavMode::Hovering && !mission_complete_ &&
      waypoints_.count(next_index_)) {
    state_.mode = UavMode::EnRoute;
    state_.target_index = next_index_;
  }
}

UavNode::StepResult UavNode::step(const std::vector<InboxItem>& inbox,
                                  uint64_t tick, double tick_seconds,
                                  EventLog& log) {
  StepResult result;
  bool transitioned = false;

  // Algorithm step 1: source-address check. Any foreign frame triggers the
  // configured failsafe unless one is already engaged.
  bool in_failsafe = state_.mode == UavMode::ReturningToLaunch ||
                     state_.mode == UavMode::Home ||
                     state_.mode == UavMode::AwaitingRekey;
  for (const auto& item : inbox) {
    if (item.verdict != link::SourceVerdict::Foreign) continue;
    if (in_failsafe) break;
    log.emit(tick, NodeId::Uav, EventKind::ForeignDetected,
             "src=" + addr_str(item.src));
    state_.gps_locked = true;
    log.emit(tick, NodeId::Uav, EventKind::GpsLocked, "home reference latched");
    if (state_.policy == Policy::Rtl) {
      state_.mode = UavMode::ReturningToLaunch;
      log.emit(tick, NodeId::Uav, EventKind::RtlEngaged, "target=home");
    } else {
      state_.mode = UavMode::AwaitingRekey;
      log.emit(tick, NodeId::Uav, EventKind::KeyChangeRequested,
               "holding position");
      result.outbound.push_back(
          {gcs_addr_, link::FrameType::KeyChangeRequest, {}});
    }
    transitioned = true;
    break;
  }

  for (const auto& item : inbox) {
    if (item.verdict != link::SourceVerdict::Trusted) continue;
    switch (item.type) {
      case link::FrameType::Command: {
        link::Command cmd;
        try {
          cmd = link::decode_command(item.plaintext);
        } catch (const ParseError&) {
          log.emit(tick, NodeId::Uav, EventKind::FrameDelivered,
                   "outcome=malformed_ignored src=" + addr_str(item.src));
          break;
        }
        switch (cmd.kind) {
          case link::Command::Kind::Goto:
            waypoints_[cmd.waypoint_index] = {cmd.x, cmd.y, cmd.waypoint_index};
            if (cmd.final_waypoint) final_index_ = cmd.waypoint_index;
            refresh_navigation();
            break;
          case link::Command::Kind::Hover:
            if (state_.mode == UavMode::EnRoute) state_.mode = UavMode::Hovering;
            break;
          case link::Command::Kind::ReturnToLaunch:
            if (state_.mode != UavMode::Home) {
              state_.gps_locked = true;
              state_.mode = UavMode::ReturningToLaunch;
              log.emit(tick, NodeId::Uav, EventKind::RtlEngaged, "commanded");
              transitioned = true;
            }
            break;
          case link::Command::Kind::Resume:
            refresh_navigation();
            break;
        }
        break;
      }
      case link::FrameType::KeyChangeAck: {
        if (state_.mode != UavMode::AwaitingRekey) break;
        if (item.plaintext.size() != 32) {
          log.emit(tick, NodeId::Uav, EventKind::FrameDelivered,
                   "outcome=malformed_ignored src=" + addr_str(item.src));
          break;
        }
        keys::SessionKey new_key;
        std::copy(item.plaintext.begin(), item.plaintext.begin() + 16,
                  new_key.bytes.begin());
        result.install_key = new_key;
        char fp[12];
        std::snprintf(fp, sizeof fp, "%02x%02x%02x%02x", item.plaintext[16],
                      item.plaintext[17], item.plaintext[18], item.plaintext[19]);
        log.emit(tick, NodeId::Uav, EventKind::Rekeyed,
                 std::string("enrollment=") + fp);
        state_.mode = UavMode::Hovering;
        refresh_navigation();  // resume toward the interrupted target
        transitioned = true;
        result.outbound.push_back({gcs_addr_, link::FrameType::Telemetry,
                                   {'r', 'e', 's', 'u', 'm', 'e', 'd'}});
        break;
      }
      default:
        break;  // telemetry and key-change requests are GCS-bound
    }
  }

  if (!transitioned) {
    double step = kin_.speed_mps * tick_seconds;
    if (state_.mode == UavMode::EnRoute) {
      const Waypoint& target = waypoints_.at(state_.target_index);
      move_toward(kin_, target.x, target.y, step);
      if (std::hypot(target.x - kin_.x, target.y - kin_.y) <= kArrivalRadius) {
        last_reached_ = target.index;
        log.emit(tick, NodeId::Uav, EventKind::WaypointReached,
                 "index=" + std::to_string(target.index));
        std::string note = "reached " + std::to_string(target.index);
        result.outbound.push_back({gcs_addr_, link::FrameType::Telemetry,
                                   std::vector<uint8_t>(note.begin(), note.end())});
        if (final_index_ != 0 && target.index == final_index_) {
          mission_complete_ = true;
          state_.mode = UavMode::Hovering;
          log.emit(tick, NodeId::Uav, EventKind::MissionComplete,
                   "waypoints=" + std::to_string(final_index_));
        } else {
          ++next_index_;
          if (waypoints_.count(next_index_)) {
            state_.target_index = next_index_;
          } else {
            state_.mode = UavMode::Hovering;
          }
        }
      }
    } else if (state_.mode == UavMode::ReturningToLaunch) {
      move_toward(kin_, kin_.home_x, kin_.home_y, step);
      if (std::hypot(kin_.home_x - kin_.x, kin_.home_y - kin_.y) <= kArrivalRadius) {
        state_.mode = UavMode::Home;
        log.emit(tick, NodeId::Uav, EventKind::ReturnedHome, "");
      }
    }
    // Hovering, AwaitingRekey and Home hold position.
  }

  return result;
}

GcsNode::GcsNode(std::vector<Waypoint> mission, uint16_t uav_addr,
                 std::optional<RekeyContext> rekey)
    : mission_(std::move(mission)), uav_addr_(uav_addr), rekey_(std::move(rekey)) {}

GcsNode::StepResult GcsNode::step(const std::vector<InboxItem>& inbox,
                                  uint64_t tick, EventLog& log) {
  StepResult result;
  if (!mission_sent_) {
    // Upload the whole mission up front, one Goto frame per waypoint.
    for (size_t i = 0; i < mission_.size(); ++i) {
      link::Command cmd;
      cmd.kind = link::Command::Kind::Goto;
      cmd.waypoint_index = mission_[i].index;
      cmd.x = mission_[i].x;
      cmd.y = mission_[i].y;
      cmd.final_waypoint = i + 1 == mission_.size();
      result.outbound.push_back(
          {uav_addr_, link::FrameType::Command, link::encode_command(cmd)});
    }
    mission_sent_ = true;
  }

  for (const auto& item : inbox) {
    if (item.verdict != link::SourceVerdict::Trusted) continue;
    if (item.type == link::FrameType::KeyChangeRequest && rekey_ && !rekey_done_) {
      keys::Enrollment rotation =
          keys::rotate_key(rekey_->record, rekey_->config, rekey_->seed);
      std::vector<uint8_t> payload(rotation.key.bytes.begin(),
                                   rotation.key.bytes.end());
      payload.insert(payload.end(), rotation.record.key_check.begin(),
                     rotation.record.key_check.end());
      result.outbound.push_back(
          {uav_addr_, link::FrameType::KeyChangeAck, std::move(payload)});
      result.install_key = rotation.key;
      rekey_done_ = true;
      log.emit(tick, NodeId::Gcs, EventKind::FrameSent,
               "keychange ack, new enrollment=" + rotation.record.fingerprint());
    }
  }
  return result;
}

AttackerNode::AttackerNode(uint16_t uav_addr, link::Command hostile_command)
    : uav_addr_(uav_addr), hostile_(hostile_command) {}

std::vector<OutboundMessage> AttackerNode::step(uint64_t) {
  if (!active_) return {};
  return {{uav_addr_, link::FrameType::Command, link::encode_command(hostile_)}};
}

namespace {

uint64_t seed_or(const std::map<std::string, uint64_t>& seeds,
                 const std::string& name, uint64_t fallback) {
  auto it = seeds.find(name);
  return it == seeds.end() ? fallback : it->second;
}

keys::SessionKey initial_session_key(const ScenarioConfig& cfg) {
  if (!cfg.eeg_record_file.empty()) {
    eeg::EegRecord record = eeg::load_record(cfg.eeg_record_file);
    if (!cfg.enrollment_file.empty()) {
      auto enr = keys::EnrollmentRecord::load(cfg.enrollment_file);
      return keys::reproduce_key(record, enr);
    }
    return keys::enroll(record, {}, seed_or(cfg.seeds, "enroll", 1)).key;
  }
  rng::Prng prng(seed_or(cfg.seeds, "session", 0x6e6575726f6b6579ull));
  keys::SessionKey key;
  for (auto& b : key.bytes) b = uint8_t(prng.next_u64());
  return key;
}

class Simulator {
 public:
  explicit Simulator(const ScenarioConfig& cfg)
      : cfg_(cfg),
        key_(initial_session_key(cfg)),
        gcs_chan_({cfg.addr_gcs}, {cfg.addr_uav}, key_),
        uav_chan_({cfg.addr_uav}, {cfg.addr_gcs}, key_),
        atk_chan_({cfg.addr_attacker}, {cfg.addr_uav}, key_),
        uav_(cfg.policy,
             {cfg.home_x, cfg.home_y, cfg.speed_mps, cfg.home_x, cfg.home_y},
             cfg.addr_gcs),
        gcs_(cfg.waypoints, cfg.addr_uav, make_rekey_context(cfg)),
        attacker_(cfg.addr_uav, hostile_command()) {}

  ScenarioResult run() {
    ScenarioResult result;
    result.verdict = ScenarioVerdict::Timeout;
    for (uint64_t tick = 0; tick < cfg_.max_ticks; ++tick) {
      auto g = gcs_.step(inbox_gcs_, tick, log_);
      inbox_gcs_.clear();
      for (const auto& msg : g.outbound) send_from(NodeId::Gcs, gcs_chan_, msg, tick);
      if (g.install_key) gcs_chan_.rekey(*g.install_key);

      maybe_trigger_attacker(tick);
      for (const auto& msg : attacker_.step(tick))
        send_from(NodeId::Attacker, atk_chan_, msg, tick);

      deliver(tick);

      auto u = uav_.step(inbox_uav_, tick, cfg_.tick_seconds, log_);
      inbox_uav_.clear();
      if (u.install_key) uav_chan_.rekey(*u.install_key);
      bool terminal = uav_.mission_complete() || uav_.returned_home();
      // Frames sent on the terminal tick could never be delivered; dropping
      // them keeps the terminal event last in the log.
      if (!terminal)
        for (const auto& msg : u.outbound) send_from(NodeId::Uav, uav_chan_, msg, tick);

      result.trajectory.push_back(
          {tick, uav_.kinematics().x, uav_.kinematics().y, uav_.state().mode});

      if (uav_.mission_complete()) {
        result.verdict = ScenarioVerdict::MissionComplete;
        break;
      }
      if (uav_.returned_home()) {
        result.verdict = ScenarioVerdict::ReturnedHome;
        break;
      }
    }
    result.events = log_.events();
    return result;
  }

 private:
  struct InFlight {
    uint64_t arrival;
    NodeId to;
    std::vector<uint8_t> wire;
  };

  static std::optional<GcsNode::RekeyContext> make_rekey_context(
      const ScenarioConfig& cfg) {
    if (cfg.policy != Policy::Rekey) return std::nullopt;
    GcsNode::RekeyContext ctx;
    ctx.record = eeg::load_record(cfg.eeg_record_file);
    ctx.config = keys::PipelineConfig{};
    ctx.seed = seed_or(cfg.seeds, "rekey", 2);
    return ctx;
  }

  static link::Command hostile_command() {
    link::Command cmd;
    cmd.kind = link::Command::Kind::Goto;
    cmd.waypoint_index = 999;
    cmd.x = -250.0;
    cmd.y = -175.0;
    return cmd;
  }

  void maybe_trigger_attacker(uint64_t tick) {
    if (attacker_.active()) return;
    switch (cfg_.attack.trigger) {
      case AttackConfig::Trigger::None:
        return;
      case AttackConfig::Trigger::AtTick:
        if (tick >= cfg_.attack.value) attacker_.activate();
        return;
      case AttackConfig::Trigger::AfterWaypoint:
        if (uav_.last_reached() >= cfg_.attack.value) attacker_.activate();
        return;
    }
  }

  void send_from(NodeId node, link::SecureChannel& chan,
                 const OutboundMessage& msg, uint64_t tick) {
    link::SecureFrame frame =
        chan.seal_next(msg.type, {msg.dst}, msg.plaintext);
    char detail[96];
    std::snprintf(detail, sizeof detail, "type=%u dst=%s counter=%u",
                  unsigned(frame.frame_type), addr_str(msg.dst).c_str(),
                  frame.frame_counter);
    log_.emit(tick, node, EventKind::FrameSent, detail);
    NodeId to;
    if (msg.dst == cfg_.addr_uav) to = NodeId::Uav;
    else if (msg.dst == cfg_.addr_gcs) to = NodeId::Gcs;
    else return;  // no receiver at that address
    inflight_.push_back(
        {tick + cfg_.link_delay_ticks, to, link::encode_frame(frame)});
  }

  void deliver(uint64_t tick) {
    for (auto it = inflight_.begin(); it != inflight_.end();) {
      if (it->arrival != tick) {
        ++it;
        continue;
      }
      auto dec = link::decode_frame(it->wire);
      if (dec.status != link::DecodeStatus::Ok) {
        log_.emit(tick, it->to, EventKind::FrameDelivered, "outcome=decode_error");
        it = inflight_.erase(it);
        continue;
      }
      link::SecureChannel& chan =
          it->to == NodeId::Uav ? uav_chan_ : gcs_chan_;
      std::vector<InboxItem>& inbox =
          it->to == NodeId::Uav ? inbox_uav_ : inbox_gcs_;
      link::OpenResult res = chan.open(dec.frame);
      const char* outcome =
          res.status == link::OpenStatus::BadMic   ? "bad_mic"
          : res.status == link::OpenStatus::Replay ? "replay"
          : res.verdict == link::SourceVerdict::Foreign ? "foreign"
                                                        : "trusted";
      char detail[96];
      std::snprintf(detail, sizeof detail, "type=%u src=%s counter=%u outcome=%s",
                    unsigned(dec.frame.frame_type),
                    addr_str(dec.frame.src.value).c_str(),
                    dec.frame.frame_counter, outcome);
      log_.emit(tick, it->to, EventKind::FrameDelivered, detail);
      if (res.status == link::OpenStatus::Ok)
        inbox.push_back({res.verdict, dec.frame.frame_type,
                         dec.frame.src.value, std::move(res.plaintext)});
      it = inflight_.erase(it);
    }
  }

  const ScenarioConfig& cfg_;
  EventLog log_;
  keys::SessionKey key_;
  link::SecureChannel gcs_chan_;
  link::SecureChannel uav_chan_;
  link::SecureChannel atk_chan_;
  UavNode uav_;
  GcsNode gcs_;
  AttackerNode attacker_;
  std::vector<InFlight> inflight_;
  std::vector<InboxItem> inbox_gcs_;
  std::vector<InboxItem> inbox_uav_;
};

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& config) {
  ScenarioConfig cfg = config;
  for (size_t i = 0; i < cfg.waypoints.size(); ++i)
    cfg.waypoints[i].index = uint16_t(i + 1);  // mission order is positional
  cfg.validate();
  Simulator sim(cfg);
  return sim.run();
}

namespace {

void json_escape_into(std::string& out, const std::string& s) {
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out.push_back('\\');
      out.push_back(c);
    } else if (static_cast<unsigned char>(c) < 0x20) {
      char buf[8];
      std::snprintf(buf, sizeof buf, "\\u%04x", c);
      out += buf;
    } else {
      out.push_back(c);
    }
  }
}

}  // namespace

std::string events_to_jsonl(const std::vector<SimEvent>& events) {
  std::string out;
  for (const auto& e : events) {
    out += "{\"tick\":" + std::to_string(e.tick);
    out += ",\"node\":\"";
    out += to_string(e.node);
    out += "\",\"kind\":\"";
    out += to_string(e.kind);
    out += "\",\"detail\":\"";
    json_escape_into(out, e.detail);
    out += "\",\"seq\":" + std::to_string(e.seq) + "}\n";
  }
  return out;
}

std::string trajectory_to_csv(const std::vector<TrajectoryPoint>& trajectory) {
  std::string out = "tick,x,y,mode\n";
  char buf[128];
  for (const auto& p : trajectory) {
    std::snprintf(buf, sizeof buf, "%llu,%.6f,%.6f,%s\n",
                  static_cast<unsigned long long>(p.tick), p.x, p.y,
                  to_string(p.mode));
    out += buf;
  }
  return out;
}

}  // namespace neurokey::sim
