#pragma once

#include "agrisim/camera.hpp"
#include "agrisim/cdr.hpp"
#include "agrisim/dynamics.hpp"
#include "agrisim/frames.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

// Field layouts follow the ROS 2 message definitions (builtin_interfaces,
// std_msgs, geometry_msgs, nav_msgs, sensor_msgs, tf2_msgs, rosgraph_msgs).

namespace agrisim::msg {

struct Time {
  std::int32_t sec = 0;
  std::uint32_t nanosec = 0;
  bool operator==(const Time&) const = default;

  static Time from_seconds(double t) {
    double whole = std::floor(t);
    auto ns = static_cast<std::int64_t>(std::llround((t - whole) * 1e9));
    if (ns >= 1'000'000'000) {
      ns -= 1'000'000'000;
      whole += 1.0;
    }
    return {static_cast<std::int32_t>(whole), static_cast<std::uint32_t>(ns)};
  }
  double seconds() const { return sec + nanosec * 1e-9; }
};

struct Header {
  Time stamp;
  std::string frame_id;
  bool operator==(const Header&) const = default;
};

struct Vector3 {
  double x = 0, y = 0, z = 0;
  bool operator==(const Vector3&) const = default;
};

struct Quaternion {
  double x = 0, y = 0, z = 0, w = 1;
  bool operator==(const Quaternion&) const = default;
};

struct Pose {
  Vector3 position;  // geometry_msgs/Point has the same layout
  Quaternion orientation;
  bool operator==(const Pose&) const = default;
};

struct PoseWithCovariance {
  Pose pose;
  std::array<double, 36> covariance{};
  bool operator==(const PoseWithCovariance&) const = default;
};

struct Twist {
  Vector3 linear;
  Vector3 angular;
  bool operator==(const Twist&) const = default;
};

struct TwistWithCovariance {
  Twist twist;
  std::array<double, 36> covariance{};
  bool operator==(const TwistWithCovariance&) const = default;
};

struct Odometry {
  Header header;
  std::string child_frame_id;
  PoseWithCovariance pose;
  TwistWithCovariance twist;
  bool operator==(const Odometry&) const = default;
};

struct Image {
  Header header;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::string encoding;
  std::uint8_t is_bigendian = 0;
  std::uint32_t step = 0;
  std::vector<std::uint8_t> data;
  bool operator==(const Image&) const = default;
};

struct RegionOfInterest {
  std::uint32_t x_offset = 0, y_offset = 0, height = 0, width = 0;
  bool do_rectify = false;
  bool operator==(const RegionOfInterest&) const = default;
};

struct CameraInfo {
  Header header;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::string distortion_model;
  std::vector<double> d;
  std::array<double, 9> k{};
  std::array<double, 9> r{};
  std::array<double, 12> p{};
  std::uint32_t binning_x = 0;
  std::uint32_t binning_y = 0;
  RegionOfInterest roi;
  bool operator==(const CameraInfo&) const = default;
};

struct Transform {
  Vector3 translation;
  Quaternion rotation;
  bool operator==(const Transform&) const = default;
};

struct TransformStamped {
  Header header;
  std::string child_frame_id;
  Transform transform;
  bool operator==(const TransformStamped&) const = default;
};

struct TFMessage {
  std::vector<TransformStamped> transforms;
  bool operator==(const TFMessage&) const = default;
};

struct Clock {
  Time clock;
  bool operator==(const Clock&) const = default;
};

using Message = std::variant<Odometry, Image, CameraInfo, TFMessage, Clock>;

enum class Kind { Odometry, Image, CameraInfo, TFMessage, Clock };

/// Bytes per pixel for the encodings we emit; 0 if unknown.
inline std::uint32_t bytes_per_pixel(std::string_view encoding) {
  if (encoding == "32FC1") return 4;
  if (encoding == "mono16" || encoding == "16UC1") return 2;
  if (encoding == "rgb8" || encoding == "bgr8") return 3;
  if (encoding == "mono8" || encoding == "8UC1") return 1;
  return 0;
}

inline void validate(const Image& m) {
  const auto bpp = bytes_per_pixel(m.encoding);
  if (bpp == 0) throw cdr::SchemaError("Image.encoding '" + m.encoding + "' is not supported");
  if (m.step != m.width * bpp) throw cdr::SchemaError("Image.step must equal width * bytes per pixel");
  if (m.data.size() != static_cast<std::size_t>(m.step) * m.height) {
    throw cdr::SchemaError("Image.data size must equal step * height");
  }
}
inline void validate(const CameraInfo& m) {
  if (m.distortion_model.empty() && !m.d.empty()) throw cdr::SchemaError("CameraInfo.d requires a distortion_model");
}
inline void validate(const Odometry&) {}
inline void validate(const TFMessage&) {}
inline void validate(const Clock&) {}

namespace io {

using cdr::Reader;
using cdr::Writer;

inline void write(Writer& w, const Time& t) {
  w.put(t.sec);
  w.put(t.nanosec);
}
inline void read(Reader& r, Time& t) {
  t.sec = r.get<std::int32_t>();
  t.nanosec = r.get<std::uint32_t>();
}
inline void write(Writer& w, const Header& h) {
  write(w, h.stamp);
  w.put_string(h.frame_id);
}
inline void read(Reader& r, Header& h) {
  read(r, h.stamp);
  h.frame_id = r.get_string();
}
inline void write(Writer& w, const Vector3& v) {
  w.put(v.x);
  w.put(v.y);
  w.put(v.z);
}
inline void read(Reader& r, Vector3& v) {
  v.x = r.get<double>();
  v.y = r.get<double>();
  v.z = r.get<double>();
}
inline void write(Writer& w, const Quaternion& q) {
  w.put(q.x);
  w.put(q.y);
  w.put(q.z);
  w.put(q.w);
}
inline void read(Reader& r, Quaternion& q) {
  q.x = r.get<double>();
  q.y = r.get<double>();
  q.z = r.get<double>();
  q.w = r.get<double>();
}
inline void write(Writer& w, const Odometry& m) {
  write(w, m.header);
  w.put_string(m.child_frame_id);
  write(w, m.pose.pose.position);
  write(w, m.pose.pose.orientation);
  w.put_array(m.pose.covariance);
  write(w, m.twist.twist.linear);
  write(w, m.twist.twist.angular);
  w.put_array(m.twist.covariance);
}
inline void read(Reader& r, Odometry& m) {
  read(r, m.header);
  m.child_frame_id = r.get_string();
  read(r, m.pose.pose.position);
  read(r, m.pose.pose.orientation);
  m.pose.covariance = r.get_array<double, 36>();
  read(r, m.twist.twist.linear);
  read(r, m.twist.twist.angular);
  m.twist.covariance = r.get_array<double, 36>();
}
inline void write(Writer& w, const Image& m) {
  write(w, m.header);
  w.put(m.height);
  w.put(m.width);
  w.put_string(m.encoding);
  w.put(m.is_bigendian);
  w.put(m.step);
  w.put_sequence(m.data);
}
inline void read(Reader& r, Image& m) {
  read(r, m.header);
  m.height = r.get<std::uint32_t>();
  m.width = r.get<std::uint32_t>();
  m.encoding = r.get_string();
  m.is_bigendian = r.get<std::uint8_t>();
  m.step = r.get<std::uint32_t>();
  m.data = r.get_sequence<std::uint8_t>();
}
inline void write(Writer& w, const CameraInfo& m) {
  write(w, m.header);
  w.put(m.height);
  w.put(m.width);
  w.put_string(m.distortion_model);
  w.put_sequence(m.d);
  w.put_array(m.k);
  w.put_array(m.r);
  w.put_array(m.p);
  w.put(m.binning_x);
  w.put(m.binning_y);
  w.put(m.roi.x_offset);
  w.put(m.roi.y_offset);
  w.put(m.roi.height);
  w.put(m.roi.width);
  w.put(m.roi.do_rectify);
}
inline void read(Reader& r, CameraInfo& m) {
  read(r, m.header);
  m.height = r.get<std::uint32_t>();
  m.width = r.get<std::uint32_t>();
  m.distortion_model = r.get_string();
  m.d = r.get_sequence<double>();
  m.k = r.get_array<double, 9>();
  m.r = r.get_array<double, 9>();
  m.p = r.get_array<double, 12>();
  m.binning_x = r.get<std::uint32_t>();
  m.binning_y = r.get<std::uint32_t>();
  m.roi.x_offset = r.get<std::uint32_t>();
  m.roi.y_offset = r.get<std::uint32_t>();
  m.roi.height = r.get<std::uint32_t>();
  m.roi.width = r.get<std::uint32_t>();
  m.roi.do_rectify = r.get<bool>();
}
inline void write(Writer& w, const TransformStamped& m) {
  write(w, m.header);
  w.put_string(m.child_frame_id);
  write(w, m.transform.translation);
  write(w, m.transform.rotation);
}
inline void read(Reader& r, TransformStamped& m) {
  read(r, m.header);
  m.child_frame_id = r.get_string();
  read(r, m.transform.translation);
  read(r, m.transform.rotation);
}
inline void write(Writer& w, const TFMessage& m) {
  w.put(static_cast<std::uint32_t>(m.transforms.size()));
  for (const auto& t : m.transforms) write(w, t);
}
inline void read(Reader& r, TFMessage& m) {
  const std::size_t at = r.offset();
  const auto n = r.get<std::uint32_t>();
  // Each transform is at least 60 bytes; reject absurd counts before allocating.
  if (n > r.remaining() / 60 + 1) throw cdr::DecodeError("sequence length exceeds payload", at);
  m.transforms.resize(n);
  for (auto& t : m.transforms) read(r, t);
}
inline void write(Writer& w, const Clock& m) {
  write(w, m.clock);
}
inline void read(Reader& r, Clock& m) {
  read(r, m.clock);
}

}  // namespace io

template <typename M>
std::vector<std::uint8_t> encode(const M& m) {
  validate(m);
  cdr::Writer w;
  io::write(w, m);
  return std::move(w).take();
}

template <typename M>
M decode(std::span<const std::uint8_t> bytes) {
  cdr::Reader r(bytes);
  M m;
  io::read(r, m);
  r.finish();
  return m;
}

inline std::vector<std::uint8_t> encode(const Message& m) {
  return std::visit([](const auto& v) { return encode(v); }, m);
}

inline Message decode(std::span<const std::uint8_t> bytes, Kind kind) {
  switch (kind) {
    case Kind::Odometry: return decode<Odometry>(bytes);
    case Kind::Image: return decode<Image>(bytes);
    case Kind::CameraInfo: return decode<CameraInfo>(bytes);
    case Kind::TFMessage: return decode<TFMessage>(bytes);
    case Kind::Clock: return decode<Clock>(bytes);
  }
  throw std::invalid_argument("unknown message kind");
}

// Builders from simulator state.

inline Vector3 to_msg(const Vec3& v) {
  return {v.x(), v.y(), v.z()};
}
inline Quaternion to_msg(const UnitQuaternion& q) {
  return {q.x(), q.y(), q.z(), q.w()};
}
inline Vec3 from_msg(const Vector3& v) {
  return {v.x, v.y, v.z};
}
inline UnitQuaternion from_msg(const Quaternion& q) {
  return UnitQuaternion(q.w, q.x, q.y, q.z);
}

/// Pose in the Z-up world frame, twist in the body frame, zero covariance.
inline Odometry build_odometry(const MultirotorState& s, Time stamp,
                               std::string frame_id = std::string(frame_name(FrameId::WorldZUp)),
                               std::string child_frame_id = std::string(frame_name(FrameId::Body))) {
  Odometry m;
  m.header = {stamp, std::move(frame_id)};
  m.child_frame_id = std::move(child_frame_id);
  m.pose.pose.position = to_msg(s.position);
  m.pose.pose.orientation = to_msg(s.orientation);
  m.twist.twist.linear = to_msg(Vec3(s.orientation.conjugate() * s.velocity));
  m.twist.twist.angular = to_msg(s.angular_velocity);
  return m;
}

inline Image build_depth_image(const DepthImage& img, Time stamp,
                               std::string frame_id = std::string(frame_name(FrameId::Camera))) {
  if (img.width < 0 || img.height < 0 ||
      img.data.size() != static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height)) {
    throw cdr::SchemaError("depth image dimensions do not match its data");
  }
  Image m;
  m.header = {stamp, std::move(frame_id)};
  m.height = static_cast<std::uint32_t>(img.height);
  m.width = static_cast<std::uint32_t>(img.width);
  m.encoding = "32FC1";
  m.step = m.width * 4;
  m.data.resize(img.data.size() * 4);
  std::memcpy(m.data.data(), img.data.data(), m.data.size());
  return m;
}

inline Image build_seg_image(const SegImage& img, Time stamp,
                             std::string frame_id = std::string(frame_name(FrameId::Camera))) {
  if (img.width < 0 || img.height < 0 ||
      img.data.size() != static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height)) {
    throw cdr::SchemaError("segmentation image dimensions do not match its data");
  }
  Image m;
  m.header = {stamp, std::move(frame_id)};
  m.height = static_cast<std::uint32_t>(img.height);
  m.width = static_cast<std::uint32_t>(img.width);
  m.encoding = "mono16";
  m.step = m.width * 2;
  m.data.resize(img.data.size() * 2);
  std::memcpy(m.data.data(), img.data.data(), m.data.size());
  return m;
}

inline Image build_rgb_image(const RgbImage& img, Time stamp,
                             std::string frame_id = std::string(frame_name(FrameId::Camera))) {
  if (img.width < 0 || img.height < 0 ||
      img.data.size() != 3 * static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height)) {
    throw cdr::SchemaError("rgb image dimensions do not match its data");
  }
  Image m;
  m.header = {stamp, std::move(frame_id)};
  m.height = static_cast<std::uint32_t>(img.height);
  m.width = static_cast<std::uint32_t>(img.width);
  m.encoding = "rgb8";
  m.step = m.width * 3;
  m.data = img.data;
  return m;
}

inline CameraInfo build_camera_info(const CameraModel& model, Time stamp,
                                    std::string frame_id = std::string(frame_name(FrameId::Camera))) {
  CameraInfo m;
  m.header = {stamp, std::move(frame_id)};
  m.height = static_cast<std::uint32_t>(model.height);
  m.width = static_cast<std::uint32_t>(model.width);
  m.distortion_model = "plumb_bob";
  m.d = {0, 0, 0, 0, 0};
  m.k = {model.fx, 0, model.cx, 0, model.fy, model.cy, 0, 0, 1};
  m.r = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  m.p = {model.fx, 0, model.cx, 0, 0, model.fy, model.cy, 0, 0, 0, 1, 0};
  return m;
}

/// world -> base_link from the vehicle state and base_link -> camera_link
/// from the camera mount.
inline TFMessage build_tf(const MultirotorState& s, const CameraModel& model, Time stamp) {
  TFMessage m;
  TransformStamped body;
  body.header = {stamp, std::string(frame_name(FrameId::WorldZUp))};
  body.child_frame_id = std::string(frame_name(FrameId::Body));
  body.transform = {to_msg(s.position), to_msg(s.orientation)};
  TransformStamped cam;
  cam.header = {stamp, std::string(frame_name(FrameId::Body))};
  cam.child_frame_id = std::string(frame_name(FrameId::Camera));
  cam.transform = {to_msg(model.body_to_camera.translation), to_msg(model.body_to_camera.rotation)};
  m.transforms = {body, cam};
  return m;
}

inline Clock build_clock(Time stamp) {
  return {stamp};
}

}  // namespace agrisim::msg
