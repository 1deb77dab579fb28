#include "mines/core.hpp"

#include <cmath>
#include <sstream>

#include "mines/geometry.hpp"

namespace mines {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

void SmoothnessSpec::validate() const {
  if (!(L > 0.0) || !(sigma_sc > 0.0) || !(sigma_sc <= L)) {
    throw Error(ErrorKind::InvalidArgument, "smoothness requires 0 < sigma <= L");
  }
  if (!(gamma >= 0.0)) throw Error(ErrorKind::InvalidArgument, "smoothness requires gamma >= 0");
}

void MinesConfig::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw Error(ErrorKind::InvalidArgument, "alpha must be positive");
  if (batch < 1) throw Error(ErrorKind::InvalidArgument, "batch must be >= 1");
  if (max_iters < 0) throw Error(ErrorKind::InvalidArgument, "max_iters must be >= 0");
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorKind::InvalidArgument, "delta must lie in (0, 1)");
  if (trace_stride < 1) throw Error(ErrorKind::InvalidArgument, "trace_stride must be >= 1");
  if (hessian_refresh < 1) throw Error(ErrorKind::InvalidArgument, "hessian_refresh must be >= 1");
  if (switch_window < 1) throw Error(ErrorKind::InvalidArgument, "switch_window must be >= 1");
  if (const auto* step = std::get_if<ConstantStep>(&eta1); step && !(step->value >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "constant eta1 must be >= 0");
  }
  if (const auto* step = std::get_if<ConstantStep>(&eta2); step && !(step->value >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "constant eta2 must be >= 0");
  }
  if (smoothness) smoothness->validate();
}

MinesConfig default_config(Eigen::Index d, const std::optional<SmoothnessSpec>& smoothness) {
  MinesConfig config;
  config.batch = static_cast<int>(d);
  config.alpha = 1e-3;
  if (smoothness) {
    config.band = SpectralBandd(smoothness->sigma_sc / 2.0, 2.0 * smoothness->L);
    config.eta1 = ConstantStep{0.25 / smoothness->L};
    config.smoothness = smoothness;
  } else {
    config.band = SpectralBandd(1e-4, 1e4);
    config.eta1 = TheoryLocal{};
    config.local_estimate = LocalEstimate::FiniteDifference;
    config.switch_mode = SwitchMode::Heuristic;
  }
  return config;
}

SymMatrixd initial_sigma_inv(Eigen::Index d, const SpectralBandd& band) {
  return project_spectral_band(SymMatrixd::identity(d), band).matrix;
}

std::string describe(const Eta1Schedule& schedule) {
  return std::visit(Overloaded{
                        [](const TheoryGlobal&) { return std::string("theory-global"); },
                        [](const TheoryLocal&) { return std::string("theory-local"); },
                        [](const ConstantStep& s) {
                          std::ostringstream out;
                          out.precision(17);
                          out << s.value;
                          return out.str();
                        },
                        [](const CustomStep&) { return std::string("custom"); },
                    },
                    schedule);
}

std::string describe(const Eta2Schedule& schedule) {
  return std::visit(Overloaded{
                        [](const InverseK&) { return std::string("inverse-k"); },
                        [](const ConstantStep& s) {
                          std::ostringstream out;
                          out.precision(17);
                          out << s.value;
                          return out.str();
                        },
                    },
                    schedule);
}

}  // namespace mines
