#include <cmath>

#include "framewright/dynamics.hpp"
#include "framewright/error.hpp"

namespace framewright::dynamics {

using namespace linalg;

Unitary4 GateInstance::core() const {
  Mat2 pre = wrap_pre.value_or(Mat2::Identity());
  Mat2 post = wrap_post.value_or(Mat2::Identity());
  return Unitary4::kron(post.adjoint(), Mat2::Identity()) * canonical *
         Unitary4::kron(pre.adjoint(), Mat2::Identity());
}

bool GateInstance::calibrated() const {
  return static_cast<int>(calibrated_phases.size()) == traits(kind).phase_count;
}

Mat4 frame_operator(const FrameOffsets &off, double t) {
  return zz_layer(kTwoPiMHz * off.driven_mhz * t, kTwoPiMHz * off.idle_mhz * t);
}

Unitary4 frame_wrap(const Unitary4 &v, const FrameOffsets &off, double t_start, double t_end) {
  return Unitary4::from_matrix(frame_operator(off, t_end), 1e-10) * v *
         Unitary4::from_matrix(frame_operator(off, t_start), 1e-10).adjoint();
}

Unitary4 frame_wrap(const GateInstance &inst, double t_start, double t_end) {
  if (std::abs((t_end - t_start) - inst.duration_ns) > 1e-6)
    throw ValidationError("frame_wrap: window length differs from the gate duration");
  return frame_wrap(inst.canonical, inst.frame_offsets, t_start, t_end);
}

} // namespace framewright::dynamics
