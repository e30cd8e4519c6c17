#include "mcx/ela.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "mcx/problems.hpp"

namespace mcx {

namespace {

constexpr double kRatioCap = 1e15;
constexpr double kLogEpsFloor = -5.0;

FeatureValues make_group(std::size_t count) {
  return FeatureValues{std::vector<double>(count, 0.0), std::vector<bool>(count, false)};
}

/// num / den with a capped sentinel when den vanishes.
double guarded_ratio(double num, double den, bool& flag) {
  if (den != 0.0 && std::isfinite(num / den)) return num / den;
  flag = true;
  return num == 0.0 ? 1.0 : std::copysign(kRatioCap, num);
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (const double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (n % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

/// Pearson correlation; 0 with a flag when either side has no variance.
double pearson(const std::vector<double>& a, const std::vector<double>& b, bool& flag) {
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) {
    flag = true;
    return 0.0;
  }
  return sab / std::sqrt(saa * sbb);
}

/// Quantile of R's default type 7.
double quantile7(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

/// Row indices ordered by (y, index).
std::vector<int> rank_order(const Vector& y) {
  std::vector<int> order(static_cast<std::size_t>(y.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return y(a) < y(b); });
  return order;
}

Matrix pairwise_distances(const Matrix& X) {
  const Eigen::Index n = X.rows();
  Matrix D(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    D(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) D(i, j) = D(j, i) = (X.row(i) - X.row(j)).norm();
  }
  return D;
}

void validate(const Sample& sample, Eigen::Index min_rows, std::string_view group) {
  if (sample.X.rows() != sample.y.size())
    throw ContractError(std::string(group) + ": X and y disagree in length");
  if (sample.X.rows() < min_rows)
    throw ContractError(std::string(group) + ": needs at least " + std::to_string(min_rows) +
                        " points");
  if (!sample.X.allFinite() || !sample.y.allFinite())
    throw ContractError(std::string(group) + ": sample contains non-finite values");
}

struct LinearFit {
  Vector coef;
  double adj_r2 = 0.0;
  bool degenerate = false;
};

LinearFit least_squares(const Matrix& A, const Vector& y) {
  LinearFit fit;
  const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(A);
  fit.coef = cod.solve(y);
  fit.degenerate = cod.rank() < A.cols();
  const double n = static_cast<double>(A.rows());
  const double p = static_cast<double>(A.cols() - 1);
  const double ss_tot = (y.array() - y.mean()).square().sum();
  const double ss_res = (y - A * fit.coef).squaredNorm();
  if (ss_tot <= 0.0 || n - p - 1.0 <= 0.0) {
    fit.degenerate = true;
    fit.adj_r2 = 0.0;
    return fit;
  }
  const double r2 = 1.0 - ss_res / ss_tot;
  fit.adj_r2 = 1.0 - (1.0 - r2) * (n - 1.0) / (n - p - 1.0);
  return fit;
}

Matrix design_matrix(const Matrix& X, bool interactions, bool squares) {
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  const Eigen::Index cols = 1 + d + (squares ? d : 0) + (interactions ? d * (d - 1) / 2 : 0);
  Matrix A(n, cols);
  A.col(0).setOnes();
  A.middleCols(1, d) = X;
  Eigen::Index c = 1 + d;
  if (squares)
    for (Eigen::Index j = 0; j < d; ++j) A.col(c++) = X.col(j).array().square().matrix();
  if (interactions)
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = i + 1; j < d; ++j)
        A.col(c++) = X.col(i).cwiseProduct(X.col(j));
  return A;
}

void explained_variance(const Matrix& data, bool correlation, double& expl_var, double& pc1,
                        bool& flag) {
  Matrix centered = data.rowwise() - data.colwise().mean();
  const double denom = static_cast<double>(data.rows() - 1);
  if (correlation) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < centered.cols(); ++j) {
      const double sd = std::sqrt(centered.col(j).squaredNorm() / denom);
      if (sd > 0.0) {
        centered.col(j) /= sd;
        keep.push_back(j);
      }
    }
    if (static_cast<Eigen::Index>(keep.size()) < centered.cols()) {
      flag = true;
      Matrix reduced(centered.rows(), static_cast<Eigen::Index>(keep.size()));
      for (std::size_t k = 0; k < keep.size(); ++k)
        reduced.col(static_cast<Eigen::Index>(k)) = centered.col(keep[k]);
      centered = std::move(reduced);
    }
  }
  const auto p = static_cast<double>(data.cols());
  if (centered.cols() == 0) {
    flag = true;
    expl_var = 1.0 / p;
    pc1 = 1.0;
    return;
  }
  const Matrix cov = centered.transpose() * centered / denom;
  const Eigen::SelfAdjointEigenSolver<Matrix> solver(cov, Eigen::EigenvaluesOnly);
  Vector ev = solver.eigenvalues().reverse().cwiseMax(0.0);
  const double total = ev.sum();
  if (!(total > 0.0)) {
    flag = true;
    expl_var = 1.0 / p;
    pc1 = 1.0;
    return;
  }
  double cumulative = 0.0;
  Eigen::Index k = 0;
  while (k < ev.size()) {
    cumulative += ev(k++);
    if (cumulative >= 0.9 * total) break;
  }
  expl_var = static_cast<double>(k) / p;
  pc1 = ev(0) / total;
}

}  // namespace

void FeatureValues::append(const FeatureValues& other) {
  values.insert(values.end(), other.values.begin(), other.values.end());
  degenerate.insert(degenerate.end(), other.degenerate.begin(), other.degenerate.end());
}

const std::vector<std::string>& feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out{"ela_distr.skewness", "ela_distr.kurtosis",
                                 "ela_distr.number_of_peaks"};
    for (const char* m :
         {"lin_simple.adj_r2", "lin_simple.intercept", "lin_simple.coef.min", "lin_simple.coef.max",
          "lin_simple.coef.max_by_min", "lin_w_interact.adj_r2", "quad_simple.adj_r2",
          "quad_simple.cond", "quad_w_interact.adj_r2"})
      out.push_back(std::string("ela_meta.") + m);
    for (const char* kind : {"ratio", "diff"})
      for (const char* stat : {"mean", "median"})
        for (const char* q : {"02", "05", "10", "25"})
          out.push_back(std::string("disp.") + kind + "_" + stat + "_" + q);
    for (const char* m : {"h.max", "eps.s", "eps.max", "eps.ratio", "m0"})
      out.push_back(std::string("ic.") + m);
    for (const char* m : {"nn_nb.sd_ratio", "nn_nb.mean_ratio", "nn_nb.cor", "dist_ratio.coeff_var",
                          "nb_fitness.cor"})
      out.push_back(std::string("nbc.") + m);
    for (const char* m : {"expl_var.cov_x", "expl_var.cor_x", "expl_var.cov_init", "expl_var.cor_init",
                          "expl_var_PC1.cov_x", "expl_var_PC1.cor_x", "expl_var_PC1.cov_init",
                          "expl_var_PC1.cor_init"})
      out.push_back(std::string("pca.") + m);
    return out;
  }();
  return names;
}

int feature_index(std::string_view name) {
  const auto& names = feature_names();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  throw RegistryError("unknown feature '" + std::string(name) + "'");
}

double silverman_bandwidth(const Vector& y) {
  std::vector<double> v(y.data(), y.data() + y.size());
  const double hi = sample_sd(v);
  double lo = std::min(hi, (quantile7(v, 0.75) - quantile7(v, 0.25)) / 1.34);
  if (!(lo > 0.0)) lo = hi;
  if (!(lo > 0.0)) lo = std::abs(v.front());
  if (!(lo > 0.0)) lo = 1.0;
  return 0.9 * lo * std::pow(static_cast<double>(v.size()), -0.2);
}

int kde_peak_count(const Vector& y) {
  // Gaussian KDE on 512 points over [min - 3 bw, max + 3 bw]; the density is
  // cut at its interior local minima and segments holding more than 1% of
  // the probability mass count as peaks.
  constexpr int kGrid = 512;
  constexpr double kCut = 3.0;
  constexpr double kModeMass = 0.01;
  const double bw = silverman_bandwidth(y);
  const double lo = y.minCoeff() - kCut * bw;
  const double hi = y.maxCoeff() + kCut * bw;
  const double step = (hi - lo) / (kGrid - 1.0);
  const double norm = 1.0 / (static_cast<double>(y.size()) * bw * std::sqrt(2.0 * M_PI));
  std::vector<double> density(kGrid, 0.0);
  for (int g = 0; g < kGrid; ++g) {
    const double t = lo + step * g;
    double s = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double u = (t - y(i)) / bw;
      s += std::exp(-0.5 * u * u);
    }
    density[static_cast<std::size_t>(g)] = s * norm;
  }
  std::vector<int> cuts{0};
  for (int g = 1; g + 1 < kGrid; ++g) {
    const double here = density[static_cast<std::size_t>(g)];
    if (here < density[static_cast<std::size_t>(g - 1)] && here < density[static_cast<std::size_t>(g + 1)])
      cuts.push_back(g);
  }
  cuts.push_back(kGrid - 1);
  int peaks = 0;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    double mass = 0.0;
    for (int g = cuts[c]; g <= cuts[c + 1]; ++g) mass += density[static_cast<std::size_t>(g)];
    if (mass * step > kModeMass) ++peaks;
  }
  return std::max(peaks, 1);
}

FeatureValues distr_features(const Sample& sample) {
  validate(sample, 4, "distr_features");
  FeatureValues out = make_group(3);
  const Vector& y = sample.y;
  const double n = static_cast<double>(y.size());
  const Eigen::ArrayXd c = y.array() - y.mean();
  const double m2 = c.square().sum() / n;
  if (!(m2 > 0.0)) {
    out.values = {0.0, 0.0, 1.0};
    out.degenerate = {true, true, true};
    return out;
  }
  const double m3 = c.cube().sum() / n;
  const double m4 = c.square().square().sum() / n;
  out.values[0] = m3 / std::pow(m2, 1.5);
  out.values[1] = m4 / (m2 * m2) - 3.0;
  out.values[2] = kde_peak_count(y);
  return out;
}

FeatureValues meta_model_features(const Sample& sample) {
  validate(sample, 2, "meta_model_features");
  FeatureValues out = make_group(9);
  const Matrix& X = sample.X;
  const Eigen::Index d = X.cols();

  const LinearFit lin = least_squares(design_matrix(X, false, false), sample.y);
  const Vector slopes = lin.coef.segment(1, d).cwiseAbs();
  out.values[0] = lin.adj_r2;
  out.values[1] = lin.coef(0);
  out.values[2] = slopes.minCoeff();
  out.values[3] = slopes.maxCoeff();
  bool ratio_flag = false;
  out.values[4] = guarded_ratio(slopes.maxCoeff(), slopes.minCoeff(), ratio_flag);
  for (int i = 0; i < 4; ++i) out.degenerate[static_cast<std::size_t>(i)] = lin.degenerate;
  out.degenerate[4] = lin.degenerate || ratio_flag;

  const LinearFit lin_int = least_squares(design_matrix(X, true, false), sample.y);
  out.values[5] = lin_int.adj_r2;
  out.degenerate[5] = lin_int.degenerate;

  const LinearFit quad = least_squares(design_matrix(X, false, true), sample.y);
  const Vector squares = quad.coef.segment(1 + d, d).cwiseAbs();
  out.values[6] = quad.adj_r2;
  out.degenerate[6] = quad.degenerate;
  bool cond_flag = false;
  out.values[7] = guarded_ratio(squares.maxCoeff(), squares.minCoeff(), cond_flag);
  out.degenerate[7] = quad.degenerate || cond_flag;

  const LinearFit quad_int = least_squares(design_matrix(X, true, true), sample.y);
  out.values[8] = quad_int.adj_r2;
  out.degenerate[8] = quad_int.degenerate;
  return out;
}

FeatureValues dispersion_features(const Sample& sample) {
  validate(sample, 2, "dispersion_features");
  FeatureValues out = make_group(16);
  const Matrix D = pairwise_distances(sample.X);
  const Eigen::Index n = D.rows();

  auto distances_of = [&](const std::vector<int>& rows) {
    std::vector<double> v;
    v.reserve(rows.size() * (rows.size() - 1) / 2);
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = i + 1; j < rows.size(); ++j) v.push_back(D(rows[i], rows[j]));
    return v;
  };

  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  const std::vector<double> full = distances_of(all);
  const double full_mean = mean_of(full);
  const double full_median = median_of(full);

  const std::vector<int> order = rank_order(sample.y);
  constexpr std::array<double, 4> kQuantiles{0.02, 0.05, 0.10, 0.25};
  for (std::size_t q = 0; q < kQuantiles.size(); ++q) {
    const auto wanted = static_cast<Eigen::Index>(std::ceil(kQuantiles[q] * n - 1e-9));
    const bool small = wanted < 2;
    const auto m = static_cast<std::ptrdiff_t>(std::max<Eigen::Index>(2, wanted));
    const std::vector<int> best(order.begin(), order.begin() + m);
    const std::vector<double> sub = distances_of(best);
    const double sub_mean = mean_of(sub);
    const double sub_median = median_of(sub);
    bool flag_mean = small, flag_median = small;
    out.values[q] = guarded_ratio(sub_mean, full_mean, flag_mean);
    out.values[4 + q] = guarded_ratio(sub_median, full_median, flag_median);
    out.values[8 + q] = sub_mean - full_mean;
    out.values[12 + q] = sub_median - full_median;
    out.degenerate[q] = out.degenerate[8 + q] = flag_mean;
    out.degenerate[4 + q] = out.degenerate[12 + q] = flag_median;
  }
  return out;
}

std::vector<int> nearest_neighbor_tour(const Matrix& X) {
  const Eigen::Index n = X.rows();
  std::vector<int> tour;
  tour.reserve(static_cast<std::size_t>(n));
  std::vector<bool> visited(static_cast<std::size_t>(n), false);
  int current = 0;
  for (Eigen::Index step = 0; step < n; ++step) {
    tour.push_back(current);
    visited[static_cast<std::size_t>(current)] = true;
    int next = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (visited[static_cast<std::size_t>(j)]) continue;
      const double dist = (X.row(current) - X.row(j)).squaredNorm();
      if (dist < best) {
        best = dist;
        next = static_cast<int>(j);
      }
    }
    if (next < 0) break;
    current = next;
  }
  return tour;
}

std::vector<double> tour_slopes(const Sample& sample, const std::vector<int>& tour) {
  std::vector<double> slopes;
  if (tour.size() < 2) return slopes;
  slopes.reserve(tour.size() - 1);
  for (std::size_t k = 0; k + 1 < tour.size(); ++k) {
    const double dist = (sample.X.row(tour[k + 1]) - sample.X.row(tour[k])).norm();
    const double dy = sample.y(tour[k + 1]) - sample.y(tour[k]);
    slopes.push_back(dist > 0.0 ? dy / dist : 0.0);
  }
  return slopes;
}

namespace {

int symbol(double slope, double eps) {
  if (slope > eps) return 1;
  if (slope < -eps) return -1;
  return 0;
}

}  // namespace

double information_entropy(const std::vector<double>& slopes, double eps) {
  if (slopes.size() < 2) return 0.0;
  std::array<std::array<std::size_t, 3>, 3> counts{};
  for (std::size_t k = 0; k + 1 < slopes.size(); ++k)
    ++counts[static_cast<std::size_t>(symbol(slopes[k], eps) + 1)]
            [static_cast<std::size_t>(symbol(slopes[k + 1], eps) + 1)];
  const double total = static_cast<double>(slopes.size() - 1);
  double h = 0.0;
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b) {
      if (a == b || counts[a][b] == 0) continue;
      const double p = static_cast<double>(counts[a][b]) / total;
      h -= p * std::log(p) / std::log(6.0);
    }
  return h;
}

double partial_information(const std::vector<double>& slopes) {
  std::vector<int> symbols;
  for (const double s : slopes) {
    const int v = symbol(s, 0.0);
    if (v != 0) symbols.push_back(v);
  }
  if (symbols.size() < 2) return 0.0;
  std::size_t changes = 0;
  for (std::size_t k = 0; k + 1 < symbols.size(); ++k)
    if (symbols[k] != symbols[k + 1]) ++changes;
  return static_cast<double>(changes) / static_cast<double>(symbols.size() - 1);
}

const std::vector<double>& epsilon_grid() {
  static const std::vector<double> grid = [] {
    std::vector<double> g{0.0};
    constexpr int kPoints = 1000;
    for (int i = 0; i < kPoints; ++i) g.push_back(std::pow(10.0, -5.0 + 20.0 * i / (kPoints - 1.0)));
    return g;
  }();
  return grid;
}

FeatureValues information_content_features(const Sample& sample) {
  validate(sample, 3, "information_content_features");
  FeatureValues out = make_group(5);
  const std::vector<double> slopes = tour_slopes(sample, nearest_neighbor_tour(sample.X));
  const auto& grid = epsilon_grid();
  auto log_eps = [](double eps) { return eps > 0.0 ? std::log10(eps) : kLogEpsFloor; };

  std::vector<double> H(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) H[i] = information_entropy(slopes, grid[i]);
  const auto argmax =
      static_cast<std::size_t>(std::max_element(H.begin(), H.end()) - H.begin());
  const double h_max = H[argmax];

  const bool constant = sample.y.maxCoeff() == sample.y.minCoeff();
  auto first_below = [&](std::size_t from, double level) {
    for (std::size_t i = from; i < H.size(); ++i)
      if (H[i] < level) return log_eps(grid[i]);
    return log_eps(grid.back());
  };
  out.values[0] = h_max;
  out.values[1] = first_below(0, 0.05);
  out.values[2] = log_eps(grid[argmax]);
  out.values[3] = constant ? kLogEpsFloor : first_below(argmax, 0.5 * h_max);
  out.values[4] = partial_information(slopes);
  if (constant) out.degenerate.assign(5, true);
  return out;
}

FeatureValues nbc_features(const Sample& sample) {
  validate(sample, 3, "nbc_features");
  FeatureValues out = make_group(5);
  const Matrix D = pairwise_distances(sample.X);
  const Eigen::Index n = D.rows();
  const std::vector<int> order = rank_order(sample.y);

  std::vector<double> d_nn(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  std::vector<double> d_nb(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  std::vector<int> nb(static_cast<std::size_t>(n), -1);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) d_nn[static_cast<std::size_t>(i)] = std::min(d_nn[static_cast<std::size_t>(i)], D(i, j));
  // Walk points from best to worst; everything earlier in the order is better.
  for (std::size_t r = 1; r < order.size(); ++r) {
    const int i = order[r];
    for (std::size_t s = 0; s < r; ++s) {
      const int j = order[s];
      if (D(i, j) < d_nb[static_cast<std::size_t>(i)]) {
        d_nb[static_cast<std::size_t>(i)] = D(i, j);
        nb[static_cast<std::size_t>(i)] = j;
      }
    }
  }
  double max_nb = 0.0;
  for (std::size_t r = 1; r < order.size(); ++r)
    max_nb = std::max(max_nb, d_nb[static_cast<std::size_t>(order[r])]);
  d_nb[static_cast<std::size_t>(order[0])] = max_nb;

  bool f0 = false, f1 = false, f2 = false, f3 = false, f4 = false;
  out.values[0] = guarded_ratio(sample_sd(d_nn), sample_sd(d_nb), f0);
  out.values[1] = guarded_ratio(mean_of(d_nn), mean_of(d_nb), f1);
  out.values[2] = pearson(d_nn, d_nb, f2);

  std::vector<double> ratios;
  for (Eigen::Index i = 0; i < n; ++i)
    if (d_nn[static_cast<std::size_t>(i)] > 0.0)
      ratios.push_back(d_nb[static_cast<std::size_t>(i)] / d_nn[static_cast<std::size_t>(i)]);
  if (ratios.size() < 2) {
    f3 = true;
    out.values[3] = 0.0;
  } else {
    out.values[3] = guarded_ratio(sample_sd(ratios), mean_of(ratios), f3);
  }
  if (static_cast<Eigen::Index>(ratios.size()) < n) f3 = true;

  std::vector<double> indegree(static_cast<std::size_t>(n), 0.0);
  for (const int j : nb)
    if (j >= 0) indegree[static_cast<std::size_t>(j)] += 1.0;
  const std::vector<double> y(sample.y.data(), sample.y.data() + n);
  out.values[4] = pearson(indegree, y, f4);
  out.degenerate = {f0, f1, f2, f3, f4};
  return out;
}

FeatureValues pca_features(const Sample& sample) {
  validate(sample, sample.X.cols() + 2, "pca_features");
  FeatureValues out = make_group(8);
  Matrix init(sample.X.rows(), sample.X.cols() + 1);
  init << sample.X, sample.y;
  const std::array<std::pair<const Matrix*, bool>, 4> bases{
      {{&sample.X, false}, {&sample.X, true}, {&init, false}, {&init, true}}};
  for (std::size_t b = 0; b < bases.size(); ++b) {
    bool flag = false;
    explained_variance(*bases[b].first, bases[b].second, out.values[b], out.values[4 + b], flag);
    out.degenerate[b] = out.degenerate[4 + b] = flag;
  }
  return out;
}

FeatureVector compute_features(const Sample& sample) {
  FeatureVector out;
  out.append(distr_features(sample));
  out.append(meta_model_features(sample));
  out.append(dispersion_features(sample));
  out.append(information_content_features(sample));
  out.append(nbc_features(sample));
  out.append(pca_features(sample));
  for (const double v : out.values)
    if (!std::isfinite(v)) throw NumericalError("feature computation produced a non-finite value");
  return out;
}

FeatureVector aggregate_repetitions(const std::vector<FeatureVector>& repetitions) {
  if (repetitions.empty()) throw ContractError("aggregate_repetitions: no repetitions");
  const std::size_t count = repetitions.front().size();
  FeatureVector out;
  out.values.resize(count);
  out.degenerate.resize(count);
  std::vector<double> column(repetitions.size());
  for (std::size_t f = 0; f < count; ++f) {
    std::size_t flagged = 0;
    for (std::size_t r = 0; r < repetitions.size(); ++r) {
      if (repetitions[r].size() != count)
        throw ContractError("aggregate_repetitions: vectors differ in length");
      column[r] = repetitions[r].values[f];
      if (repetitions[r].degenerate[f]) ++flagged;
    }
    out.values[f] = median_of(column);
    out.degenerate[f] = 2 * flagged > repetitions.size();
  }
  return out;
}

FeatureVector extract_features(const ProblemInstance& instance, int repetitions, int jobs,
                               std::vector<FeatureVector>* raw) {
  if (repetitions < 1) throw ContractError("extract_features: repetitions must be >= 1");
  std::vector<FeatureVector> per_rep(static_cast<std::size_t>(repetitions));
  parallel_for(per_rep.size(), jobs, [&](std::size_t r) {
    per_rep[r] = compute_features(design_for_ela(instance, static_cast<int>(r)));
  });
  FeatureVector out = aggregate_repetitions(per_rep);
  if (raw) *raw = std::move(per_rep);
  return out;
}

}  // namespace mcx
