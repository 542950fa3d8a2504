#include "metareg/problems.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "metareg/rng.hpp"

namespace metareg {

namespace {

/* log(1 + exp(z)) without overflow */
double softplus(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

int ProblemInstance::dim() const {
  return kind == ProblemKind::quadratic ? static_cast<int>(A.rows())
                                        : static_cast<int>(X.cols());
}

std::string ProblemInstance::describe() const {
  std::ostringstream os;
  if (kind == ProblemKind::quadratic) {
    os << "quadratic(d=" << A.rows();
    if (mu_min > 0.0) os << ",mu=[" << mu_min << "," << mu_max << "]";
    os << ")";
  } else {
    os << "logistic(n=" << X.rows() << ",d=" << X.cols() << ",reg=" << reg << ")";
  }
  if (stream.batch_size > 0) os << "+stream(batch=" << stream.batch_size << ")";
  return os.str();
}

ProblemInstance make_quadratic(int d, double mu_min, double mu_max,
                               std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("make_quadratic: d must be >= 1");
  if (!(mu_min > 0.0) || !(mu_max >= mu_min))
    throw std::invalid_argument("make_quadratic: need 0 < mu_min <= mu_max");

  Rng rng(seed);
  Mat M(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) M(i, j) = rng.normal();
  Eigen::HouseholderQR<Mat> qr(M);
  Mat Q = qr.householderQ();

  Vec evals(d);
  for (int i = 0; i < d; ++i)
    evals[i] = d == 1 ? mu_min
                      : mu_min + (mu_max - mu_min) * i / (d - 1.0);

  ProblemInstance p;
  p.kind = ProblemKind::quadratic;
  p.A = Q * evals.asDiagonal() * Q.transpose();
  p.A = 0.5 * (p.A + p.A.transpose()).eval();
  p.b = Vec(d);
  for (int i = 0; i < d; ++i) p.b[i] = rng.normal();
  p.mu_min = mu_min;
  p.mu_max = mu_max;
  p.x0 = Vec::Zero(d);
  return p;
}

ProblemInstance make_logistic(int n, int d, double reg, std::uint64_t seed,
                              double feature_scale, double label_noise) {
  if (n < 1 || d < 1) throw std::invalid_argument("make_logistic: bad shape");
  Rng rng(seed);
  Mat X(n, d);
  const double s = feature_scale / std::sqrt(static_cast<double>(d));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) X(i, j) = s * rng.normal();
  Vec w(d);
  for (int j = 0; j < d; ++j) w[j] = rng.normal();
  w /= w.norm();
  Vec y(n);
  for (int i = 0; i < n; ++i) {
    double m = X.row(i).dot(w) + label_noise * rng.normal();
    y[i] = m >= 0.0 ? 1.0 : -1.0;
  }

  ProblemInstance p;
  p.kind = ProblemKind::logistic;
  p.X = std::move(X);
  p.y = std::move(y);
  p.reg = reg;
  p.x0 = Vec::Zero(d);
  return p;
}

ProblemInstance load_csv_dataset(const std::string& path, double reg) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv_dataset: cannot open " + path);

  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        size_t pos = 0;
        double v = std::stod(cell, &pos);
        while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
        if (pos != cell.size()) throw std::invalid_argument(cell);
        row.push_back(v);
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (first) {  // header
        first = false;
        continue;
      }
      throw std::runtime_error("load_csv_dataset: non-numeric cell in " + path);
    }
    first = false;
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("load_csv_dataset: ragged row in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().size() < 2)
    throw std::runtime_error("load_csv_dataset: need rows with features and a label");

  const int n = static_cast<int>(rows.size());
  const int d = static_cast<int>(rows.front().size()) - 1;
  ProblemInstance p;
  p.kind = ProblemKind::logistic;
  p.X = Mat(n, d);
  p.y = Vec(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) p.X(i, j) = rows[i][j];
    p.y[i] = rows[i][d] > 0.5 ? 1.0 : -1.0;
  }
  p.reg = reg;
  p.x0 = Vec::Zero(d);
  return p;
}

namespace {

double logistic_loss(const Mat& X, const Vec& y, double reg, const Vec& x) {
  double acc = 0.0;
  Vec m = X * x;
  for (Eigen::Index i = 0; i < y.size(); ++i) acc += softplus(-y[i] * m[i]);
  return acc / static_cast<double>(y.size()) + 0.5 * reg * x.squaredNorm();
}

Vec logistic_grad(const Mat& X, const Vec& y, double reg, const Vec& x) {
  Vec m = X * x;
  Vec w(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) w[i] = -y[i] * sigmoid(-y[i] * m[i]);
  return X.transpose() * w / static_cast<double>(y.size()) + reg * x;
}

/* damped Newton for (optionally sample-weighted) regularized logistic loss */
Vec logistic_newton(const Mat& X, const Vec& y, double reg, const Vec* weights) {
  const Eigen::Index n = X.rows(), d = X.cols();
  const double wn = 1.0 / static_cast<double>(n);
  Vec x = Vec::Zero(d);
  for (int it = 0; it < 200; ++it) {
    Vec m = X * x;
    Vec g = reg * x;
    Mat H = reg * Mat::Identity(d, d);
    double f = 0.5 * reg * x.squaredNorm();
    for (Eigen::Index i = 0; i < n; ++i) {
      double w = weights ? (*weights)[i] : wn;
      double z = -y[i] * m[i];
      double s = sigmoid(z);
      f += w * softplus(z);
      g -= (w * y[i] * s) * X.row(i).transpose();
      H += (w * s * (1.0 - s)) * (X.row(i).transpose() * X.row(i));
    }
    if (g.norm() <= 1e-12) break;
    Vec dx = H.ldlt().solve(g);
    double t = 1.0;
    double gd = g.dot(dx);
    auto value = [&](const Vec& xx) {
      double v = 0.5 * reg * xx.squaredNorm();
      Vec mm = X * xx;
      for (Eigen::Index i = 0; i < n; ++i) {
        double w = weights ? (*weights)[i] : wn;
        v += w * softplus(-y[i] * mm[i]);
      }
      return v;
    };
    for (int bt = 0; bt < 60 && value(x - t * dx) > f - 1e-4 * t * gd; ++bt)
      t *= 0.5;
    x -= t * dx;
  }
  return x;
}

}  // namespace

double loss(const ProblemInstance& p, const Vec& x) {
  if (x.size() != p.dim()) throw std::invalid_argument("loss: dimension mismatch");
  if (p.kind == ProblemKind::quadratic)
    return 0.5 * x.dot(p.A * x) - p.b.dot(x);
  return logistic_loss(p.X, p.y, p.reg, x);
}

Vec gradient(const ProblemInstance& p, const Vec& x) {
  if (x.size() != p.dim()) throw std::invalid_argument("gradient: dimension mismatch");
  if (p.kind == ProblemKind::quadratic) return p.A * x - p.b;
  return logistic_grad(p.X, p.y, p.reg, x);
}

Vec optimum(const ProblemInstance& p) {
  if (p.kind == ProblemKind::quadratic) return p.A.ldlt().solve(p.b);
  return logistic_newton(p.X, p.y, p.reg, nullptr);
}

double mu_min_of(const ProblemInstance& p) {
  if (p.kind == ProblemKind::quadratic) {
    if (p.mu_min > 0.0) return p.mu_min;
    Eigen::SelfAdjointEigenSolver<Mat> es(p.A);
    return es.eigenvalues().minCoeff();
  }
  return p.reg;
}

OnlineStream::OnlineStream(const ProblemInstance& p, int batch_size,
                           long horizon, std::uint64_t seed)
    : prob_(&p), batch_(batch_size), horizon_(horizon) {
  if (batch_size < 1) throw std::invalid_argument("OnlineStream: batch_size must be >= 1");
  if (horizon < 1) throw std::invalid_argument("OnlineStream: horizon must be >= 1");

  int n;
  if (p.kind == ProblemKind::quadratic) {
    n = p.stream.n_samples;
    if (n < 1)
      throw std::invalid_argument("OnlineStream: quadratic stream needs n_samples >= 1");
    const int d = p.dim();
    Rng srng(p.stream.sample_seed);
    bs_ = Mat(n, d);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) bs_(i, j) = p.stream.sample_noise * srng.normal();
    /* centre exactly so epoch sums match the full objective */
    Vec mean = bs_.colwise().mean();
    bs_.rowwise() -= mean.transpose();
    bs_.rowwise() += p.b.transpose();
  } else {
    n = static_cast<int>(p.X.rows());
  }
  if (batch_size > n)
    throw std::invalid_argument("OnlineStream: batch_size exceeds sample count");

  Rng rng(seed);
  order_.reserve(static_cast<size_t>(horizon) * batch_);
  while (order_.size() < static_cast<size_t>(horizon) * batch_) {
    std::vector<int> perm = rng.permutation(n);
    for (int idx : perm) {
      if (order_.size() == static_cast<size_t>(horizon) * batch_) break;
      order_.push_back(idx);
    }
  }
}

double OnlineStream::loss(long t, const Vec& x) const {
  if (t < 0 || t >= horizon_) throw std::out_of_range("OnlineStream::loss: bad step");
  const int* idx = batch_at(t);
  if (prob_->kind == ProblemKind::quadratic) {
    Vec bbar = Vec::Zero(x.size());
    for (int k = 0; k < batch_; ++k) bbar += bs_.row(idx[k]).transpose();
    bbar /= static_cast<double>(batch_);
    return 0.5 * x.dot(prob_->A * x) - bbar.dot(x);
  }
  double acc = 0.0;
  Vec m = prob_->X * x;
  for (int k = 0; k < batch_; ++k)
    acc += softplus(-prob_->y[idx[k]] * m[idx[k]]);
  return acc / batch_ + 0.5 * prob_->reg * x.squaredNorm();
}

Vec OnlineStream::gradient(long t, const Vec& x) const {
  if (t < 0 || t >= horizon_) throw std::out_of_range("OnlineStream::gradient: bad step");
  const int* idx = batch_at(t);
  if (prob_->kind == ProblemKind::quadratic) {
    Vec bbar = Vec::Zero(x.size());
    for (int k = 0; k < batch_; ++k) bbar += bs_.row(idx[k]).transpose();
    bbar /= static_cast<double>(batch_);
    return prob_->A * x - bbar;
  }
  Vec g = prob_->reg * x;
  for (int k = 0; k < batch_; ++k) {
    int i = idx[k];
    double z = -prob_->y[i] * prob_->X.row(i).dot(x);
    g -= (prob_->y[i] * sigmoid(z) / batch_) * prob_->X.row(i).transpose();
  }
  return g;
}

Vec OnlineStream::comparator() const {
  if (prob_->kind == ProblemKind::quadratic) {
    Vec bbar = Vec::Zero(prob_->dim());
    for (int idx : order_) bbar += bs_.row(idx).transpose();
    bbar /= static_cast<double>(order_.size());
    return prob_->A.ldlt().solve(bbar);
  }
  Vec w = Vec::Zero(prob_->X.rows());
  for (int idx : order_) w[idx] += 1.0;
  w /= static_cast<double>(horizon_ * batch_);
  return logistic_newton(prob_->X, prob_->y, prob_->reg, &w);
}

}  // namespace metareg
