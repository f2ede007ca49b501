#pragma once

#include <string>
#include <utility>

namespace calib {

/// Coordinate frame label. Transforms carry a (destination, source) pair of
/// these so that frame bookkeeping errors surface as typed failures instead
/// of silently wrong numbers.
class FrameId {
 public:
  enum class Label { World, Tcp, Camera, Lidar, Pattern, Custom };

  FrameId() : label_(Label::World) {}

  static FrameId world() { return FrameId(Label::World); }
  static FrameId tcp() { return FrameId(Label::Tcp); }
  static FrameId camera() { return FrameId(Label::Camera); }
  static FrameId lidar() { return FrameId(Label::Lidar); }
  static FrameId pattern() { return FrameId(Label::Pattern); }
  static FrameId custom(std::string name) {
    FrameId f(Label::Custom);
    f.name_ = std::move(name);
    return f;
  }

  /// Maps the canonical names back to built-in labels; anything else
  /// becomes a custom frame.
  static FrameId parse(const std::string& name) {
    if (name == "world") return world();
    if (name == "tcp") return tcp();
    if (name == "camera") return camera();
    if (name == "lidar") return lidar();
    if (name == "pattern") return pattern();
    return custom(name);
  }

  Label label() const { return label_; }

  const std::string& name() const {
    static const std::string names[] = {"world", "tcp", "camera", "lidar",
                                        "pattern"};
    if (label_ == Label::Custom) return name_;
    return names[static_cast<int>(label_)];
  }

  bool operator==(const FrameId& other) const {
    if (label_ != other.label_) return false;
    return label_ != Label::Custom || name_ == other.name_;
  }
  bool operator!=(const FrameId& other) const { return !(*this == other); }

 private:
  explicit FrameId(Label label) : label_(label) {}

  Label label_;
  std::string name_;  // only used for Label::Custom
};

}  // namespace calib
