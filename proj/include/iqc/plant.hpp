#ifndef IQC_PLANT_HPP
#define IQC_PLANT_HPP

#include <optional>

#include "iqc/lti.hpp"

namespace iqc {

/// d → e channel partitioned as [A | B B₂; C | D D₁₂; C₂ | D₂₁ D₂₂].
struct PerformanceChannel {
  Matrix b2, c2, d12, d21, d22;
  bool operator==(const PerformanceChannel&) const = default;
};

/// Uncertain plant ẋ = Ax + Bw, z = Cx + Dw closed by w = Δ(z), with an optional performance channel.
struct Plant {
  StateSpace sys;
  std::optional<PerformanceChannel> perf;

  Plant() = default;
  explicit Plant(StateSpace s, std::optional<PerformanceChannel> p = std::nullopt)
      : sys(std::move(s)), perf(std::move(p)) {
    if (!perf) return;
    const auto n = sys.states();
    const auto nd = perf->b2.cols();
    const auto ne = perf->c2.rows();
    if (perf->b2.rows() != n || perf->c2.cols() != n || perf->d12.rows() != sys.outputs() ||
        perf->d12.cols() != nd || perf->d21.rows() != ne || perf->d21.cols() != sys.inputs() ||
        perf->d22.rows() != ne || perf->d22.cols() != nd)
      throw Error(ErrorCode::DimensionMismatch, "performance channel dimensions do not match the plant");
  }

  Eigen::Index states() const { return sys.states(); }
  Eigen::Index z_dim() const { return sys.outputs(); }
  Eigen::Index w_dim() const { return sys.inputs(); }
  Eigen::Index d_dim() const { return perf ? perf->b2.cols() : 0; }
  Eigen::Index e_dim() const { return perf ? perf->c2.rows() : 0; }

  bool operator==(const Plant&) const = default;
};

}  // namespace iqc

#endif  // IQC_PLANT_HPP
