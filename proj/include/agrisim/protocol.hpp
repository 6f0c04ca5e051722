#pragma once

#include "agrisim/rl_env.hpp"
#include "agrisim/sim_core.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// JSON command protocol: one object per WebSocket message, tagged by "type".
// Transport-agnostic; the WebSocket server feeds it text and delivers what it
// returns. See docs/protocol.md for the message catalogue.

namespace agrisim::protocol {

using json = nlohmann::json;

inline constexpr int kVersion = 1;

enum class ClientKind { Viewer, Scripted, RlAgent };

inline std::optional<ClientKind> parse_client_kind(std::string_view s) {
  if (s == "viewer") return ClientKind::Viewer;
  if (s == "scripted") return ClientKind::Scripted;
  if (s == "rl_agent") return ClientKind::RlAgent;
  return std::nullopt;
}

inline const char* client_kind_name(ClientKind k) {
  switch (k) {
    case ClientKind::Viewer: return "viewer";
    case ClientKind::Scripted: return "scripted";
    case ClientKind::RlAgent: return "rl_agent";
  }
  return "viewer";
}

/// Bad field in an inbound message; maps to an `invalid_field` error.
class FieldError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline json vec3(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

inline json quat(const UnitQuaternion& q) { return {{"w", q.w()}, {"x", q.x()}, {"y", q.y()}, {"z", q.z()}}; }

inline json state_json(const MultirotorState& s) {
  return {{"time", s.time},
          {"position", vec3(s.position)},
          {"velocity", vec3(s.velocity)},
          {"orientation", quat(s.orientation)},
          {"angular_velocity", vec3(s.angular_velocity)}};
}

inline std::string error_message(std::string_view code, std::string_view detail) {
  return json{{"type", "error"}, {"code", code}, {"detail", detail}}.dump();
}

inline std::string event_message(const SimEvent& ev, ControlMode mode) {
  return std::visit(
      [&](const auto& e) -> std::string {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, StateEvent>) {
          json j = state_json(e.state);
          j["type"] = "state";
          j["mode"] = mode_name(mode);
          return j.dump();
        } else if constexpr (std::is_same_v<T, CollisionEvent>) {
          return json{{"type", "collision"},
                      {"time", e.time},
                      {"class_id", e.class_id},
                      {"class_name", e.class_name},
                      {"position", vec3(e.position)}}
              .dump();
        } else if constexpr (std::is_same_v<T, GoalReachedEvent>) {
          return json{{"type", "goal_reached"}, {"time", e.time}, {"goto_id", e.goto_id}, {"position", vec3(e.position)}}
              .dump();
        } else {
          return json{{"type", "reset_done"},
                      {"time", e.time},
                      {"episode_id", e.episode_id},
                      {"scenario", e.scenario},
                      {"seed", e.seed}}
              .dump();
        }
      },
      ev);
}

inline json env_info_json(const EnvInfo& info) {
  return {{"episode_id", info.episode_id},
          {"seed", info.seed},
          {"scenario", info.scenario},
          {"step", info.step},
          {"outcome", outcome_name(info.outcome)},
          {"distance", info.distance ? json(*info.distance) : json(nullptr)},
          {"d0", info.d0},
          {"progress", info.progress},
          {"unreachable", info.unreachable},
          {"applied_action", json::array({info.applied_v_fwd, info.applied_yaw_rate})},
          {"goal", vec3(info.goal)},
          {"state", state_json(info.state)}};
}

inline std::string env_result_message(const StepResult& r) {
  return json{{"type", "env_result"},
              {"obs", r.obs},
              {"reward", r.reward},
              {"terminated", r.terminated},
              {"truncated", r.truncated},
              {"info", env_info_json(r.info)}}
      .dump();
}

namespace field {

inline const json& require(const json& msg, const char* key) {
  const auto it = msg.find(key);
  if (it == msg.end()) throw FieldError(std::string("missing field '") + key + "'");
  return *it;
}

inline double number(const json& msg, const char* key) {
  const auto& v = require(msg, key);
  if (!v.is_number()) throw FieldError(std::string("field '") + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw FieldError(std::string("field '") + key + "' must be finite");
  return d;
}

inline std::string string(const json& msg, const char* key) {
  const auto& v = require(msg, key);
  if (!v.is_string()) throw FieldError(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

inline std::uint64_t seed(const json& msg, const char* key) {
  const auto it = msg.find(key);
  if (it == msg.end()) return 0;
  // The parser stores every non-negative integer literal as unsigned.
  if (!it->is_number_unsigned()) {
    throw FieldError(std::string("field '") + key + "' must be a non-negative integer");
  }
  return it->get<std::uint64_t>();
}

template <std::size_t N>
std::array<double, N> numbers(const json& msg, const char* key) {
  const auto& v = require(msg, key);
  if (!v.is_array() || v.size() != N) {
    throw FieldError(std::string("field '") + key + "' must be an array of " + std::to_string(N) + " numbers");
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!v[i].is_number() || !std::isfinite(v[i].get<double>())) {
      throw FieldError(std::string("field '") + key + "' must contain finite numbers");
    }
    out[i] = v[i].get<double>();
  }
  return out;
}

}  // namespace field

using SessionId = std::uint64_t;

/// A message to one session, or to every identified session when `to` is empty.
struct Envelope {
  std::optional<SessionId> to;
  std::string text;
};

struct Output {
  std::vector<Envelope> messages;
  bool close = false;  // close the sender's connection after delivering
};

struct Session {
  SessionId id = 0;
  std::optional<ClientKind> kind;
  std::string client_id;
  double last_command_time = 0.0;
};

/**
 * Session bookkeeping, control authority and command dispatch.
 *
 * The first non-viewer session to identify (or to command while nobody holds
 * it) gets control authority; commands from any other session are refused
 * with `no_authority`. While an env episode is active the simulator is in
 * lockstep and tick() does not advance it.
 */
class Router {
 public:
  Router(SimCore& core, RlEnv& env) : core_(core), env_(env) {}

  void connect(SessionId id) { sessions_[id] = Session{id, std::nullopt, {}, 0.0}; }

  void disconnect(SessionId id) {
    sessions_.erase(id);
    if (authority_ == id) {
      authority_.reset();
      env_.abandon();
    }
  }

  std::optional<SessionId> authority() const { return authority_; }
  bool lockstep() const { return env_.active(); }
  const std::map<SessionId, Session>& sessions() const { return sessions_; }

  /// Advances the free-running simulator by one physics tick (no-op in lockstep).
  Output tick() {
    Output out;
    if (!lockstep()) {
      core_.tick();
      flush_events(out);
    }
    return out;
  }

  /// Pending simulator events as broadcasts, e.g. after a reset issued outside the router.
  Output flush() {
    Output out;
    flush_events(out);
    return out;
  }

  Output handle(SessionId id, std::string_view text) {
    Output out;
    auto it = sessions_.find(id);
    if (it == sessions_.end()) connect(id), it = sessions_.find(id);
    Session& session = it->second;

    const json msg = json::parse(text, nullptr, false);
    auto reply_error = [&](std::string_view code, std::string_view detail) {
      out.messages.push_back({id, error_message(code, detail)});
    };

    if (msg.is_discarded() || !msg.is_object()) {
      reply_error("malformed", "message is not a JSON object");
      out.close = !session.kind;
      return out;
    }
    const auto type_it = msg.find("type");
    if (type_it == msg.end() || !type_it->is_string()) {
      reply_error("malformed", "missing string field 'type'");
      out.close = !session.kind;
      return out;
    }
    const std::string type = type_it->get<std::string>();

    if (!session.kind) {
      if (type != "handshake") {
        reply_error("not_identified", "the first message must be a handshake");
        out.close = true;
        return out;
      }
    }

    try {
      if (type == "handshake") return handshake(session, msg);
      if (type == "ping") {
        json pong{{"type", "pong"}, {"time", core_.time()}};
        if (const auto p = msg.find("id"); p != msg.end()) pong["id"] = *p;
        out.messages.push_back({id, pong.dump()});
        return out;
      }
      if (type != "goto" && type != "velocity" && type != "reset" && type != "env_reset" && type != "env_step") {
        reply_error("unknown_type", "unknown message type '" + type.substr(0, 64) + "'");
        return out;
      }
      if (!take_authority(session)) {
        reply_error("no_authority", "another session holds control authority");
        return out;
      }
      session.last_command_time = core_.time();
      if (type == "goto") {
        const auto p = field::numbers<3>(msg, "position");
        const double yaw = msg.contains("yaw") ? field::number(msg, "yaw") : yaw_of(core_.state().orientation);
        env_.abandon();
        const auto goto_id = core_.goto_position(Vec3(p[0], p[1], p[2]), yaw);
        out.messages.push_back({id, json{{"type", "goto_ack"},
                                         {"goto_id", goto_id},
                                         {"duration", core_.trajectory().total_duration()}}
                                        .dump()});
      } else if (type == "velocity") {
        const double v = field::number(msg, "v_fwd");
        const double w = field::number(msg, "yaw_rate");
        env_.abandon();
        core_.velocity_command(v, w);
      } else if (type == "reset") {
        const std::uint64_t seed = field::seed(msg, "seed");
        const std::string scenario = field::string(msg, "scenario");
        env_.abandon();
        core_.reset(scenario, seed);
      } else if (type == "env_reset") {
        const std::uint64_t seed = field::seed(msg, "seed");
        const std::string scenario = field::string(msg, "scenario");
        const auto r = env_.reset(seed, scenario);
        flush_events(out);
        out.messages.push_back({id, env_result_message(r)});
        return out;
      } else if (type == "env_step") {
        const auto a = field::numbers<2>(msg, "action");
        const auto r = env_.step(a[0], a[1]);
        flush_events(out);
        out.messages.push_back({id, env_result_message(r)});
        return out;
      }
      flush_events(out);
    } catch (const FieldError& e) {
      reply_error("invalid_field", e.what());
    } catch (const CommandError& e) {
      reply_error(e.code(), e.what());
    } catch (const EnvError& e) {
      reply_error(e.code(), e.what());
    } catch (const std::exception& e) {
      reply_error("internal", e.what());
    }
    return out;
  }

 private:
  Output handshake(Session& session, const json& msg) {
    Output out;
    if (session.kind) {
      out.messages.push_back({session.id, error_message("already_identified", "handshake already completed")});
      return out;
    }
    const std::string kind_name = field::string(msg, "client_kind");
    const auto kind = parse_client_kind(kind_name);
    if (!kind) {
      out.messages.push_back(
          {session.id, error_message("invalid_field", "client_kind must be viewer, scripted or rl_agent")});
      out.close = true;
      return out;
    }
    session.kind = kind;
    if (const auto c = msg.find("client_id"); c != msg.end() && c->is_string()) {
      session.client_id = c->get<std::string>().substr(0, 128);
    }
    take_authority(session);

    const auto& cfg = core_.config();
    const auto& b = cfg.action_bounds;
    json scenarios = json::array();
    for (auto n : scenario_names()) scenarios.push_back(n);
    out.messages.push_back(
        {session.id,
         json{{"type", "handshake_ack"},
              {"protocol_version", kVersion},
              {"session_id", session.id},
              {"client_kind", client_kind_name(*kind)},
              {"control_authority", authority_ == session.id},
              {"physics_hz", cfg.physics_hz},
              {"state_hz", cfg.state_hz},
              {"agent_hz", env_.config().agent_hz},
              {"watchdog_s", cfg.watchdog_s},
              {"collision_radius", cfg.vehicle.collision_radius},
              {"hold_altitude", cfg.filter.hold_altitude},
              {"action_bounds", {{"v_fwd", {b.v_fwd_min, b.v_fwd_max}}, {"yaw_rate", {b.yaw_rate_min, b.yaw_rate_max}}}},
              {"observation", {{"size", kObservationSize}, {"depth_strip", {{"size", kDepthStripSize}, {"low", 0.0}, {"high", 1.0}}},
                               {"tail", {{"size", 3}, {"low", -1.0}, {"high", 1.0}}}}},
              {"max_steps", env_.config().reward.max_steps},
              {"scenarios", scenarios},
              {"scenario", core_.scenario().name}}
             .dump()});
    return out;
  }

  bool take_authority(const Session& s) {
    if (authority_ == s.id) return true;
    if (authority_ || !s.kind || *s.kind == ClientKind::Viewer) return false;
    authority_ = s.id;
    return true;
  }

  void flush_events(Output& out) {
    for (const auto& ev : core_.drain_events()) out.messages.push_back({std::nullopt, event_message(ev, core_.mode())});
  }

  SimCore& core_;
  RlEnv& env_;
  std::map<SessionId, Session> sessions_;
  std::optional<SessionId> authority_;
};

}  // namespace agrisim::protocol
