#ifndef FMCW_SCENE_HPP
#define FMCW_SCENE_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fmcw/config.hpp"
#include "fmcw/core.hpp"

namespace fmcw {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Radar frame: +y is boresight, azimuth is positive toward +x.
inline double azimuth_of(Vec2 p) { return std::atan2(p.x, p.y); }

enum class ObjectClass { pedestrian, car, cyclist, point };

inline const char* to_string(ObjectClass c) {
  switch (c) {
    case ObjectClass::pedestrian: return "pedestrian";
    case ObjectClass::car: return "car";
    case ObjectClass::cyclist: return "cyclist";
    case ObjectClass::point: return "point";
  }
  return "?";
}

inline std::optional<ObjectClass> object_class_from(std::string_view s) {
  if (s == "pedestrian") return ObjectClass::pedestrian;
  if (s == "car") return ObjectClass::car;
  if (s == "cyclist") return ObjectClass::cyclist;
  if (s == "point") return ObjectClass::point;
  return std::nullopt;
}

/// Kinematic parameters of an object's scatterer layout and micro-motion.
/// Extents are in meters along (length) and across (width) the direction of travel.
struct MicroMotion {
  double amplitude = 0.0;   // m/s, sinusoidal micro-velocity amplitude
  double frequency = 1.0;   // Hz, gait or pedal rate
  double length = 0.0;      // m
  double width = 0.0;       // m
  double rcs = 1.0;         // total linear amplitude of the object
};

/// Pedestrian total amplitude; other classes scale from it.
inline constexpr double default_pedestrian_rcs = 10000.0;
inline constexpr double default_car_rcs_ratio = 10.0;
inline constexpr double default_cyclist_rcs_ratio = 3.0;

inline MicroMotion default_motion(ObjectClass c) {
  switch (c) {
    case ObjectClass::pedestrian:
      return {2.0, 1.0, 0.0, 0.5, default_pedestrian_rcs};
    case ObjectClass::car:
      return {0.0, 1.0, 4.5, 2.0, default_car_rcs_ratio * default_pedestrian_rcs};
    case ObjectClass::cyclist:
      return {1.0, 1.5, 1.8, 0.4, default_cyclist_rcs_ratio * default_pedestrian_rcs};
    case ObjectClass::point:
      return {0.0, 1.0, 0.0, 0.0, 1.0};
  }
  return {};
}

struct SceneObject {
  ObjectClass kind = ObjectClass::point;
  Vec2 position;   // reference point at t = 0
  Vec2 velocity;
  MicroMotion motion;

  static SceneObject make(ObjectClass kind, Vec2 position, Vec2 velocity) {
    return {kind, position, velocity, default_motion(kind)};
  }

  Vec2 position_at(double t) const { return position + t * velocity; }
};

/// One point reflector at an instant.
///
/// `micro_displacement` is the line-of-sight displacement accumulated by the
/// scatterer's micro-motion; it enters the carrier phase only, while the
/// envelope (beat frequency) follows `position`.
struct Scatterer {
  Vec2 position;
  double radial_velocity = 0.0;
  double rcs_amplitude = 0.0;
  double micro_displacement = 0.0;
  std::size_t parent_object = 0;

  double range() const { return norm(position); }
};

namespace detail {

struct LocalFrame {
  Vec2 along;
  Vec2 across;
};

inline LocalFrame local_frame(const SceneObject& obj) {
  const double speed = norm(obj.velocity);
  Vec2 along = speed > 0 ? (1.0 / speed) * obj.velocity : Vec2{0.0, 1.0};
  return {along, Vec2{along.y, -along.x}};
}

inline Scatterer place(const SceneObject& obj, double t, std::size_t id, double along,
                       double across, double share) {
  const auto f = local_frame(obj);
  Scatterer s;
  s.position = obj.position_at(t) + along * f.along + across * f.across;
  const double r = norm(s.position);
  const Vec2 los = r > 0 ? (1.0 / r) * s.position : Vec2{0.0, 1.0};
  s.radial_velocity = dot(obj.velocity, los);
  s.rcs_amplitude = share * obj.motion.rcs;
  s.parent_object = id;
  return s;
}

inline void add_micro(Scatterer& s, const MicroMotion& m, double t, double phase) {
  if (m.amplitude == 0.0) return;
  const double w = 2.0 * pi * m.frequency;
  s.radial_velocity += m.amplitude * std::sin(w * t + phase);
  s.micro_displacement = m.amplitude / w * (std::cos(phase) - std::cos(w * t + phase));
}

}  // namespace detail

/// Torso plus four limbs; limbs swing with distinct phases at the gait rate.
inline std::vector<Scatterer> pedestrian_model(const SceneObject& obj, double t,
                                               std::size_t id = 0) {
  const auto& m = obj.motion;
  if (!(m.frequency > 0)) throw DomainError("gait frequency must be positive");
  const double w = m.width / 2.0;
  const double l = m.length / 2.0;
  std::vector<Scatterer> out;
  out.push_back(detail::place(obj, t, id, 0.0, 0.0, 0.4));
  struct Limb { double along, across, phase; };
  const Limb limbs[] = {
      {l, -w, 0.0},              // left arm
      {-l, w, pi},               // right arm
      {-l, -0.5 * w, pi / 2},    // left leg
      {l, 0.5 * w, 3 * pi / 2},  // right leg
  };
  for (const auto& limb : limbs) {
    auto s = detail::place(obj, t, id, limb.along, limb.across, 0.15);
    detail::add_micro(s, m, t, limb.phase);
    out.push_back(s);
  }
  return out;
}

/// Rigid grid of 6 rows by 2 columns spanning length x width.
inline std::vector<Scatterer> car_model(const SceneObject& obj, double t, std::size_t id = 0) {
  const auto& m = obj.motion;
  if (!(m.length > 0) || !(m.width > 0)) throw DomainError("car extents must be positive");
  constexpr int rows = 6;
  constexpr int cols = 2;
  std::vector<Scatterer> out;
  const double share = 1.0 / (rows * cols);
  for (int r = 0; r < rows; ++r) {
    const double along = -m.length / 2 + m.length * r / (rows - 1);
    for (int c = 0; c < cols; ++c) {
      const double across = -m.width / 2 + m.width * c / (cols - 1);
      out.push_back(detail::place(obj, t, id, along, across, share));
    }
  }
  return out;
}

/// Rigid frame and rider, plus two pedal scatterers in antiphase.
inline std::vector<Scatterer> cyclist_model(const SceneObject& obj, double t,
                                            std::size_t id = 0) {
  const auto& m = obj.motion;
  if (!(m.length > 0) || !(m.width >= 0)) throw DomainError("cyclist extents must be positive");
  if (!(m.frequency > 0)) throw DomainError("pedal frequency must be positive");
  std::vector<Scatterer> out;
  constexpr int frame_points = 5;
  for (int i = 0; i < frame_points; ++i) {
    const double along = -m.length / 2 + m.length * i / (frame_points - 1);
    out.push_back(detail::place(obj, t, id, along, 0.0, 0.12));
  }
  out.push_back(detail::place(obj, t, id, 0.0, 0.0, 0.2));  // rider
  for (int side = 0; side < 2; ++side) {
    auto s = detail::place(obj, t, id, 0.0, side ? m.width / 2 : -m.width / 2, 0.1);
    detail::add_micro(s, m, t, side ? pi : 0.0);
    out.push_back(s);
  }
  return out;
}

inline std::vector<Scatterer> point_model(const SceneObject& obj, double t, std::size_t id = 0) {
  return {detail::place(obj, t, id, 0.0, 0.0, 1.0)};
}

inline std::vector<Scatterer> scatterers_of(const SceneObject& obj, double t, std::size_t id) {
  switch (obj.kind) {
    case ObjectClass::pedestrian: return pedestrian_model(obj, t, id);
    case ObjectClass::car: return car_model(obj, t, id);
    case ObjectClass::cyclist: return cyclist_model(obj, t, id);
    case ObjectClass::point: return point_model(obj, t, id);
  }
  return {};
}

using Scene = std::vector<SceneObject>;

/// Static low-RCS points scattered uniformly over a sector, for cluttered scenes.
inline Scene scatter_clutter(std::size_t count, double rcs, double min_range, double max_range,
                             double max_azimuth_deg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ur(min_range, max_range);
  std::uniform_real_distribution<double> ua(-max_azimuth_deg, max_azimuth_deg);
  Scene out;
  for (std::size_t i = 0; i < count; ++i) {
    const double r = ur(rng);
    const double a = deg_to_rad(ua(rng));
    auto obj = SceneObject::make(ObjectClass::point, {r * std::sin(a), r * std::cos(a)}, {});
    obj.motion.rcs = rcs;
    out.push_back(obj);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scene text format: `class x0 y0 vx vy [key=value ...]`, `#` comments.
// Keys: rcs, amplitude, frequency, length, width.
// ---------------------------------------------------------------------------

inline Scene parse_scene(std::string_view text) {
  Scene scene;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    auto hash = raw.find('#');
    std::istringstream ls(raw.substr(0, hash));
    std::string cls;
    if (!(ls >> cls)) continue;
    auto where = [&] { return "scene line " + std::to_string(line_no) + ": "; };
    auto kind = object_class_from(cls);
    if (!kind) throw ParseError(where() + "unknown object class '" + cls + "'");
    SceneObject obj = SceneObject::make(*kind, {}, {});
    if (!(ls >> obj.position.x >> obj.position.y >> obj.velocity.x >> obj.velocity.y))
      throw ParseError(where() + "expected 'class x0 y0 vx vy'");
    std::string kv;
    while (ls >> kv) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) throw ParseError(where() + "expected key=value, got '" + kv + "'");
      const std::string key = kv.substr(0, eq);
      double v = 0;
      try {
        std::size_t used = 0;
        v = std::stod(kv.substr(eq + 1), &used);
        if (used != kv.size() - eq - 1) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ParseError(where() + "field '" + key + "' is not numeric");
      }
      if (key == "rcs") obj.motion.rcs = v;
      else if (key == "amplitude") obj.motion.amplitude = v;
      else if (key == "frequency") obj.motion.frequency = v;
      else if (key == "length") obj.motion.length = v;
      else if (key == "width") obj.motion.width = v;
      else throw ParseError(where() + "unknown parameter '" + key + "'");
    }
    if (obj.motion.rcs < 0 || obj.motion.length < 0 || obj.motion.width < 0)
      throw ParseError(where() + "rcs and extents must be non-negative");
    scene.push_back(obj);
  }
  return scene;
}

inline std::string to_text(const Scene& scene) {
  std::string out;
  char buf[256];
  for (const auto& o : scene) {
    std::snprintf(buf, sizeof buf,
                  "%s %.17g %.17g %.17g %.17g rcs=%.17g amplitude=%.17g frequency=%.17g "
                  "length=%.17g width=%.17g\n",
                  to_string(o.kind), o.position.x, o.position.y, o.velocity.x, o.velocity.y,
                  o.motion.rcs, o.motion.amplitude, o.motion.frequency, o.motion.length,
                  o.motion.width);
    out += buf;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ground truth
// ---------------------------------------------------------------------------

struct GroundTruthObject {
  ObjectClass label = ObjectClass::pedestrian;
  double range = 0.0;    // m
  double azimuth = 0.0;  // deg
  std::size_t frame = 0;
};

/// Labeled objects (points excluded) at each frame's start time.
inline std::vector<GroundTruthObject> ground_truth(const Scene& scene, const RadarConfig& cfg,
                                                   std::size_t n_frames) {
  std::vector<GroundTruthObject> out;
  for (std::size_t f = 0; f < n_frames; ++f) {
    const double t = static_cast<double>(f) * cfg.frame_period();
    for (const auto& o : scene) {
      if (o.kind == ObjectClass::point) continue;
      const Vec2 p = o.position_at(t);
      out.push_back({o.kind, norm(p), rad_to_deg(azimuth_of(p)), f});
    }
  }
  return out;
}

}  // namespace fmcw

#endif  // FMCW_SCENE_HPP
