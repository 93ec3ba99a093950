#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "neurokey/eeg.hpp"
#include "neurokey/keys.hpp"
#include "neurokey/link.hpp"

namespace neurokey::sim {

struct Waypoint {
  double x = 0.0;
  double y = 0.0;
  uint16_t index = 0;  // 1-based mission order
};

enum class Policy { Rtl, Rekey };

enum class UavMode { EnRoute, Hovering, ReturningToLaunch, Home, AwaitingRekey };

struct UavKinematics {
  double x = 0.0;
  double y = 0.0;
  double speed_mps = 2.0;
  double home_x = 0.0;
  double home_y = 0.0;
};

struct FailsafeState {
  UavMode mode = UavMode::Hovering;
  uint16_t target_index = 0;  // meaningful in EnRoute
  bool gps_locked = false;
  Policy policy = Policy::Rtl;
};

enum class NodeId { Gcs, Uav, Attacker };

enum class EventKind {
  FrameSent,
  FrameDelivered,
  ForeignDetected,
  GpsLocked,
  RtlEngaged,
  KeyChangeRequested,
  Rekeyed,
  WaypointReached,
  MissionComplete,
  ReturnedHome,
};

struct SimEvent {
  uint64_t tick = 0;
  NodeId node = NodeId::Uav;
  EventKind kind = EventKind::FrameSent;
  std::string detail;
  uint64_t seq = 0;  // global emission order; (tick, seq) totally orders events
};

const char* to_string(UavMode mode);
const char* to_string(NodeId node);
const char* to_string(EventKind kind);

struct AttackConfig {
  enum class Trigger { None, AfterWaypoint, AtTick };
  Trigger trigger = Trigger::None;
  uint64_t value = 0;
};

struct ScenarioConfig {
  double tick_seconds = 0.1;
  uint64_t max_ticks = 100000;
  std::vector<Waypoint> waypoints;
  double home_x = 0.0;
  double home_y = 0.0;
  double speed_mps = 2.0;
  Policy policy = Policy::Rtl;
  uint32_t link_delay_ticks = 1;
  uint16_t addr_gcs = 0x0001;
  uint16_t addr_uav = 0x0002;
  uint16_t addr_attacker = 0x0BAD;
  AttackConfig attack;
  std::string enrollment_file;
  std::string eeg_record_file;
  std::map<std::string, uint64_t> seeds;

  void validate() const;
  static ScenarioConfig from_json_text(const std::string& text);
  static ScenarioConfig load(const std::string& path);
};

enum class ScenarioVerdict { MissionComplete, ReturnedHome, Timeout };
const char* to_string(ScenarioVerdict verdict);

struct TrajectoryPoint {
  uint64_t tick = 0;
  double x = 0.0;
  double y = 0.0;
  UavMode mode = UavMode::Hovering;
};

struct ScenarioResult {
  std::vector<SimEvent> events;
  std::vector<TrajectoryPoint> trajectory;
  ScenarioVerdict verdict = ScenarioVerdict::Timeout;
};

// Attacker-free missions finish within this many ticks: flight time along
// home -> w1 -> ... -> wK at full speed, plus one arrival tick per waypoint,
// plus transport delay and the initial command upload.
uint64_t liveness_tick_bound(const ScenarioConfig& config);

ScenarioResult run_scenario(const ScenarioConfig& config);

// One SimEvent per line: {"tick":..,"node":..,"kind":..,"detail":..,"seq":..}
std::string events_to_jsonl(const std::vector<SimEvent>& events);
// Header "tick,x,y,mode", coordinates with fixed six-digit precision.
std::string trajectory_to_csv(const std::vector<TrajectoryPoint>& trajectory);

class EventLog {
 public:
  void emit(uint64_t tick, NodeId node, EventKind kind, std::string detail);
  const std::vector<SimEvent>& events() const { return events_; }

 private:
  std::vector<SimEvent> events_;
  uint64_t seq_ = 0;
};

// A MIC-verified frame as seen by a node: BadMic/Replay never get this far.
struct InboxItem {
  link::SourceVerdict verdict = link::SourceVerdict::Foreign;
  link::FrameType type = link::FrameType::Command;
  uint16_t src = 0;
  std::vector<uint8_t> plaintext;
};

struct OutboundMessage {
  uint16_t dst = 0;
  link::FrameType type = link::FrameType::Command;
  std::vector<uint8_t> plaintext;
};

// UAV-side state machine: waypoint navigation plus the two failsafe
// behaviours (return-to-launch, rekey-and-resume).
class UavNode {
 public:
  struct StepResult {
    std::vector<OutboundMessage> outbound;
    // When set, the simulator installs this key into the UAV channel
    // *before* sealing this step's outbound frames.
    std::optional<keys::SessionKey> install_key;
  };

  UavNode(Policy policy, UavKinematics kinematics, uint16_t gcs_addr);

  StepResult step(const std::vector<InboxItem>& inbox, uint64_t tick,
                  double tick_seconds, EventLog& log);

  const FailsafeState& state() const { return state_; }
  const UavKinematics& kinematics() const { return kin_; }
  bool mission_complete() const { return mission_complete_; }
  bool returned_home() const { return state_.mode == UavMode::Home; }
  uint16_t last_reached() const { return last_reached_; }

 private:
  void refresh_navigation();

  FailsafeState state_;
  UavKinematics kin_;
  uint16_t gcs_addr_;
  std::map<uint16_t, Waypoint> waypoints_;
  uint16_t next_index_ = 1;
  uint16_t final_index_ = 0;  // 0 until the final Goto arrives
  uint16_t last_reached_ = 0;
  bool mission_complete_ = false;
};

// Ground-station logic: mission upload and the rekey service.
class GcsNode {
 public:
  struct RekeyContext {
    eeg::EegRecord record;
    keys::PipelineConfig config;
    uint64_t seed = 0;
  };

  struct StepResult {
    std::vector<OutboundMessage> outbound;
    // When set, the simulator installs this key into the GCS channel
    // *after* sealing this step's outbound frames (the ack that carries the
    // new key must still go out under the old key).
    std::optional<keys::SessionKey> install_key;
  };

  GcsNode(std::vector<Waypoint> mission, uint16_t uav_addr,
          std::optional<RekeyContext> rekey);

  StepResult step(const std::vector<InboxItem>& inbox, uint64_t tick,
                  EventLog& log);

 private:
  std::vector<Waypoint> mission_;
  uint16_t uav_addr_;
  std::optional<RekeyContext> rekey_;
  bool mission_sent_ = false;
  bool rekey_done_ = false;
};

// Once triggered, sends one well-formed hostile command per tick from its
// own (foreign) address, sealed under the key it captured.
class AttackerNode {
 public:
  AttackerNode(uint16_t uav_addr, link::Command hostile_command);
  void activate() { active_ = true; }
  bool active() const { return active_; }
  std::vector<OutboundMessage> step(uint64_t tick);

 private:
  uint16_t uav_addr_;
  link::Command hostile_;
  bool active_ = false;
};

}  // namespace neurokey::sim
