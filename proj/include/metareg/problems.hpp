#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace metareg {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class ProblemKind { quadratic, logistic };

/* Online-stream shape attached to a problem; batch_size 0 means full batch.
   Quadratic streams draw n_samples per-sample linear terms b_i = b + zeta_i
   with centred Gaussian zeta of scale sample_noise, so every sample keeps the
   Hessian A and epoch sums stay proportional to the full objective. */
struct StreamConfig {
  int batch_size = 0;
  int n_samples = 0;
  double sample_noise = 0.0;
  std::uint64_t sample_seed = 0;
};

struct ProblemInstance {
  ProblemKind kind = ProblemKind::quadratic;

  /* quadratic: F(x) = x'Ax/2 - b'x, A symmetric positive definite */
  Mat A;
  Vec b;
  double mu_min = 0.0;  // spectrum bounds when known, else 0
  double mu_max = 0.0;

  /* logistic: F(x) = mean_i log(1+exp(-y_i X_i.x)) + reg/2 |x|^2, y in {-1,1} */
  Mat X;
  Vec y;
  double reg = 0.0;

  Vec x0;  // run starting point, zeros unless set
  StreamConfig stream;

  int dim() const;
  std::string describe() const;
};

/* Random rotation of a linspace(mu_min, mu_max) spectrum plus a unit-scale
   Gaussian linear term; deterministic in the seed. */
ProblemInstance make_quadratic(int d, double mu_min, double mu_max,
                               std::uint64_t seed);

/* Synthetic two-class logistic data: rows feature_scale * N(0, I/d),
   labels sign(X w* + label_noise * N(0,1)) with |w*| = 1. */
ProblemInstance make_logistic(int n, int d, double reg, std::uint64_t seed,
                              double feature_scale = 7.0,
                              double label_noise = 3.5);

/* CSV with numeric cells, one row per sample, label in the last column
   (mapped to {-1,+1} by sign / 0.5 threshold). Throws std::runtime_error on
   unreadable files or ragged rows. */
ProblemInstance load_csv_dataset(const std::string& path, double reg);

double loss(const ProblemInstance& p, const Vec& x);
Vec gradient(const ProblemInstance& p, const Vec& x);

/* Full-batch minimizer: closed form (LDLT) for quadratics, damped Newton to
   |grad| <= 1e-12 for logistic. */
Vec optimum(const ProblemInstance& p);

/* Smallest curvature of the per-sample losses (lambda_min(A), or reg). */
double mu_min_of(const ProblemInstance& p);

/* Epoch-shuffled minibatch view over a problem: f_t = mean loss of the t-th
   scheduled batch. Deterministic in the seed. */
class OnlineStream {
 public:
  OnlineStream(const ProblemInstance& p, int batch_size, long horizon,
               std::uint64_t seed);

  long horizon() const { return horizon_; }
  double loss(long t, const Vec& x) const;
  Vec gradient(long t, const Vec& x) const;

  /* minimizer of the horizon-summed objective */
  Vec comparator() const;

 private:
  const ProblemInstance* prob_;
  Mat bs_;                  // quadratic: per-sample linear terms, n x d
  std::vector<int> order_;  // horizon_ * batch_ sample indices
  int batch_ = 1;
  long horizon_ = 0;

  const int* batch_at(long t) const { return order_.data() + t * batch_; }
};

}  // namespace metareg
