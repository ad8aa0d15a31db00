#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "nvreg/fit.hpp"

namespace nvreg {

struct PhotonHistogram {
  std::vector<long> counts;  // index = photon number per shot
  long total_shots = 0;
  double window_ms = 0.0;

  void validate() const;  // bin sum must equal total_shots
  static PhotonHistogram from_samples(const std::vector<int>& photons,
                                      double window_ms = 0.0);
};

// three-component Poisson mixture of the charge sectors, ordered
// lambda(0,0) < lambda(-,0) < lambda(-,-)
struct PoissonMixture {
  Eigen::Vector3d lambdas = Eigen::Vector3d::Zero();
  Eigen::Vector3d weights = Eigen::Vector3d::Zero();
  Eigen::Vector3d lambda_sigmas = Eigen::Vector3d::Zero();
  Eigen::Vector3d weight_sigmas = Eigen::Vector3d::Zero();
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  bool degenerate = false;  // two rates within 5 %
};

enum class MixtureObjective { max_likelihood, least_squares };

struct MixtureOptions {
  MixtureObjective objective = MixtureObjective::max_likelihood;
  int max_iterations = 5000;
  double tolerance = 1e-10;
  bool fix_lambdas = false;  // weights-only refit (post-selection stage)
  Eigen::Vector3d fixed_lambdas = Eigen::Vector3d::Zero();
};

PoissonMixture fit_poisson_mixture(const PhotonHistogram& hist,
                                   const MixtureOptions& opts = {});

// synthetic generator for correlated init/read photon pairs; weights are
// (A00, A-0 single-zero combined, A--)
struct ChargeShotModel {
  Eigen::Vector3d weights{0.09, 0.42, 0.49};
  Eigen::Vector3d lambda_init{2.0, 10.0, 20.0};
  Eigen::Vector3d lambda_read{1.5, 8.0, 16.0};
};

std::vector<std::pair<int, int>> sample_charge_shots(
    const ChargeShotModel& model, long n_shots, uint64_t seed);

struct ThresholdPoint {
  int n_thresh = 0;
  double fidelity = 0;        // post-selected A--
  double relative_noise = 1;  // sqrt(N_kept(0) / N_kept(thresh))
  long n_kept = 0;
};

// post-selection trade-off: keep shots whose init window saw at least
// n_thresh photons, refit the read-window mixture with rates frozen from
// the unselected fit
std::vector<ThresholdPoint> threshold_tradeoff(
    const std::vector<std::pair<int, int>>& shots,
    const std::vector<int>& thresholds);

struct AsymmetryResult {
  double value = 0;        // |offset| / amplitude of the sine fit
  bool undefined = false;  // vanishing amplitude
};

AsymmetryResult deer_asymmetry(const FitResult& sine_fit);

}  // namespace nvreg
