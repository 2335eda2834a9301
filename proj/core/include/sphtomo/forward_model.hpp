#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sphtomo/special_fn.hpp"
#include "sphtomo/spin_state.hpp"

namespace sphtomo {

enum class PhaseNoiseKind { none, constant, model };

/// How the phase-noise amplitude enters sigma_phi(phi) in the phase model:
/// squared: sigma_ph^2 sin|phi| / sqrt(2) (sigma_ph in radians, as quoted)
/// linear:  sigma_ph   sin|phi| / sqrt(2)
enum class PhaseModelForm { squared, linear };

/// Experimental uncertainties. Used both to corrupt synthetic data and to
/// damp high partial waves during reconstruction.
struct NoiseModel {
  double sigma_N = 0.0;      ///< atom-number standard deviation (atoms)
  double sigma_Omega = 0.0;  ///< axis pointing uncertainty, <sin^2 eta> = sigma_Omega^2
  PhaseNoiseKind phase_kind = PhaseNoiseKind::none;
  double sigma_phi = 0.0;     ///< constant azimuth noise (radians)
  double sigma_ph_deg = 0.0;  ///< phase-model amplitude (degrees)
  PhaseModelForm phase_form = PhaseModelForm::squared;

  /// Throws ValidationError on negative or non-finite parameters.
  void validate() const;
  /// Azimuthal standard deviation at axis azimuth phi (radians).
  [[nodiscard]] double sigma_phi_at(double phi) const;
  [[nodiscard]] bool has_phase_noise() const noexcept { return phase_kind != PhaseNoiseKind::none; }
};

/// One Stern-Gerlach outcome along axis (theta, phi).
struct MeasurementRecord {
  double theta = 0.0;
  double phi = 0.0;
  std::optional<double> weight;  ///< c_n; empty until weights are assigned
  int two_j = 0;
  int two_m = 0;

  [[nodiscard]] SpinLabel spin() const noexcept { return {two_j, two_m}; }
  /// Throws ValidationError if the spin labels or weight are invalid.
  void validate() const;
};

struct Axis {
  double theta = 0.0;
  double phi = 0.0;
};

/// A equally spaced axes in the xy plane: phi_a = a pi / A.
[[nodiscard]] std::vector<Axis> in_plane_axes(int count);
/// Near-uniform axes over the northern hemisphere (Fibonacci lattice).
[[nodiscard]] std::vector<Axis> hemisphere_axes(int count);

/// Evaluates Stern-Gerlach distributions of one state along many axes,
/// reusing its Clebsch-Gordan table.
class Projector {
 public:
  explicit Projector(const SphericalState& state);

  /// p_m for m = -j ... +j, j = two_j_ref of the state. Entries may be
  /// negative for unphysical (reconstructed) states.
  [[nodiscard]] std::vector<double> probabilities(double theta, double phi) const;
  [[nodiscard]] int two_j() const noexcept { return state_.two_j_ref(); }

 private:
  SphericalState state_;
  TauTable tau_;
};

[[nodiscard]] std::vector<double> projection_probabilities(const SphericalState& s, double theta,
                                                           double phi);

/// Synthetic Stern-Gerlach data, deterministic in seed. Every axis draws from
/// its own counter-based stream, so results do not depend on the order in
/// which axes are processed. Weights are set to 1/M.
[[nodiscard]] std::vector<MeasurementRecord> sample_measurements(const SphericalState& s,
                                                                 std::span<const Axis> axes,
                                                                 int shots_per_axis,
                                                                 const NoiseModel& noise,
                                                                 std::uint64_t seed);

}  // namespace sphtomo
