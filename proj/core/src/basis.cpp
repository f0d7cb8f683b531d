#include "exhawkes/gp/basis.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "exhawkes/core/log.hpp"
#include "exhawkes/core/stats.hpp"

namespace exhawkes::gp {
namespace {

constexpr Eigen::Index kChunk = 4096;

// Within clusters of (numerically) equal eigenvalues the solver may return any rotation of the
// eigenspace. Replace it by the Gram-Schmidt sequence of the projections of fixed reference
// vectors r_q(j) = (1 + j / n)^q, which varies continuously with the kernel.
void canonicalize_degenerate(const Eigen::VectorXd& values, Eigen::MatrixXd& v, double rel_tol = 1e-8) {
  const auto n = v.rows();
  const double scale = values.size() ? std::max(std::abs(values[0]), 1e-300) : 1.0;
  Eigen::Index start = 0;
  while (start < values.size()) {
    Eigen::Index end = start + 1;
    while (end < values.size() && std::abs(values[end] - values[start]) <= rel_tol * scale) ++end;
    const Eigen::Index k = end - start;
    if (k > 1) {
      Eigen::MatrixXd r(n, k);
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index q = 0; q < k; ++q) r(j, q) = std::pow(1.0 + double(j) / double(n), double(q + 1));
      const Eigen::MatrixXd block = v.middleCols(start, k);
      const Eigen::MatrixXd a = block.transpose() * r;
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
      Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(k, k);
      const Eigen::MatrixXd rr = qr.matrixQR().triangularView<Eigen::Upper>();
      for (Eigen::Index c = 0; c < k; ++c)
        if (rr(c, c) < 0.0) q.col(c) *= -1.0;
      v.middleCols(start, k) = block * q;
    }
    start = end;
  }
}

// deterministic sign: w^T v > 0 with w_j = 1 + j / n, or the first clearly nonzero entry
// positive when v is orthogonal to w
void fix_signs(Eigen::MatrixXd& v) {
  const auto n = v.rows();
  Eigen::VectorXd w(n);
  for (Eigen::Index j = 0; j < n; ++j) w[j] = 1.0 + double(j) / double(n);
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    double key = w.dot(v.col(c));
    if (std::abs(key) < 1e-8) {
      const double big = v.col(c).cwiseAbs().maxCoeff();
      for (Eigen::Index j = 0; j < n; ++j)
        if (std::abs(v(j, c)) > 1e-6 * big) {
          key = v(j, c);
          break;
        }
    }
    if (key < 0.0) v.col(c) *= -1.0;
  }
}

Eigen::MatrixXd time_gram(const CovarianceKernel& k, const InducingGrid& g) {
  Eigen::MatrixXd m(g.r_t, g.r_t);
  for (int i = 0; i < g.r_t; ++i)
    for (int j = 0; j < g.r_t; ++j) m(i, j) = k.time_factor(g.t_at(i), g.t_at(j));
  return m;
}

Eigen::MatrixXd space_mark_gram(const CovarianceKernel& k, const InducingGrid& g) {
  const int n = g.r_s * g.r_m;
  Eigen::MatrixXd m(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      m(a, b) = k.space_mark_factor(g.s_at(a / g.r_m), g.m_at(a % g.r_m), g.s_at(b / g.r_m), g.m_at(b % g.r_m));
  return m;
}

Eigen::MatrixXd full_gram(const CovarianceKernel& k, const InducingGrid& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    const TriggerInput xa = g.point(static_cast<std::size_t>(a));
    for (Eigen::Index b = 0; b <= a; ++b) m(a, b) = m(b, a) = k(xa, g.point(static_cast<std::size_t>(b)));
  }
  return m;
}

// full eigendecomposition of a small factor, descending, jitter added and removed
void factor_eigen(const Eigen::MatrixXd& m, double jitter, Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
  Eigen::MatrixXd shifted = m;
  shifted.diagonal().array() += jitter;
  const EigenPairs pairs = dense_top_eigenpairs(shifted, static_cast<std::size_t>(m.rows()));
  values = pairs.values.array() - jitter;
  vectors = pairs.vectors;
  fix_signs(vectors);
  canonicalize_degenerate(values, vectors);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void write_row(std::ostream& out, const char* tag, const Eigen::VectorXd& v) {
  out << tag;
  for (double x : v) out << ',' << stats::format_double(x);
  out << '\n';
}

void write_ints(std::ostream& out, const char* tag, const std::vector<int>& v) {
  out << tag;
  for (int x : v) out << ',' << x;
  out << '\n';
}

void write_matrix(std::ostream& out, const char* tag, const Eigen::MatrixXd& m) {
  out << "matrix," << tag << ',' << m.rows() << ',' << m.cols() << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << stats::format_double(m(r, c));
    out << '\n';
  }
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(line);
  while (std::getline(in, item, ',')) out.push_back(item);
  return out;
}

std::vector<std::string> read_tagged(std::istream& in, const std::string& tag) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("basis file truncated before '" + tag + "'");
  auto fields = split(line);
  if (fields.empty() || fields[0] != tag) throw std::runtime_error("basis file: expected '" + tag + "'");
  fields.erase(fields.begin());
  return fields;
}

Eigen::VectorXd to_vector(const std::vector<std::string>& f) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(f.size()));
  for (std::size_t i = 0; i < f.size(); ++i) v[static_cast<Eigen::Index>(i)] = stats::parse_double(f[i]);
  return v;
}

std::vector<int> to_ints(const std::vector<std::string>& f) {
  std::vector<int> v;
  for (const auto& s : f) v.push_back(std::stoi(s));
  return v;
}

Eigen::MatrixXd read_matrix(std::istream& in, const std::string& tag) {
  const auto head = read_tagged(in, "matrix");
  if (head.size() != 3 || head[0] != tag) throw std::runtime_error("basis file: expected matrix '" + tag + "'");
  const long rows = std::stol(head[1]);
  const long cols = std::stol(head[2]);
  Eigen::MatrixXd m(rows, cols);
  std::string line;
  for (long r = 0; r < rows; ++r) {
    if (!std::getline(in, line)) throw std::runtime_error("basis file: matrix '" + tag + "' truncated");
    const auto f = split(line);
    if (static_cast<long>(f.size()) != cols) throw std::runtime_error("basis file: bad row in '" + tag + "'");
    for (long c = 0; c < cols; ++c) m(r, c) = stats::parse_double(f[static_cast<std::size_t>(c)]);
  }
  return m;
}

}  // namespace

TriggerInput InducingGrid::point(std::size_t index) const {
  const std::size_t sm = std::size_t(r_s) * std::size_t(r_m);
  const int i = static_cast<int>(index / sm);
  const int j = static_cast<int>((index % sm) / std::size_t(r_m));
  const int k = static_cast<int>(index % std::size_t(r_m));
  return {t_at(i), s_at(j), m_at(k)};
}

void InducingGrid::validate() const {
  if (r_t < 1 || r_s < 1 || r_m < 1) throw std::invalid_argument("inducing grid needs at least one point per axis");
  for (double o : {offset_t, offset_s, offset_m})
    if (!(o >= 0.0 && o < 1.0)) throw std::invalid_argument("inducing grid offsets must lie in [0,1)");
}

InducingGrid InducingGrid::renewed(Rng& rng) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  InducingGrid g = *this;
  g.offset_t = u(rng);
  g.offset_s = u(rng);
  g.offset_m = u(rng);
  return g;
}

EigenBasis decompose(const CovarianceKernel& k, const InducingGrid& grid, std::size_t rank,
                     const DecomposeOptions& options) {
  k.validate();
  grid.validate();
  const std::size_t n = grid.size();
  if (rank == 0 || rank > n) throw std::invalid_argument("rank must lie in [1, grid size]");

  EigenBasis b;
  b.kernel_ = k;
  b.grid_ = grid;
  Eigen::VectorXd values;

  if (k.is_separable() && options.use_kronecker) {
    b.kronecker_ = true;
    Eigen::VectorXd vt, vsm;
    factor_eigen(time_gram(k, grid), options.jitter, vt, b.time_vectors_);
    factor_eigen(space_mark_gram(k, grid), options.jitter, vsm, b.sm_vectors_);
    struct Product {
      double value;
      int t;
      int sm;
    };
    std::vector<Product> all;
    all.reserve(static_cast<std::size_t>(vt.size() * vsm.size()));
    double total2 = 0.0;
    for (int i = 0; i < vt.size(); ++i)
      for (int j = 0; j < vsm.size(); ++j) {
        all.push_back({vt[i] * vsm[j], i, j});
        total2 += all.back().value * all.back().value;
      }
    std::stable_sort(all.begin(), all.end(), [](const Product& x, const Product& y) { return x.value > y.value; });
    const double lead = all.front().value;
    if (!(lead > 0.0)) throw std::runtime_error("kernel matrix has no positive eigenvalue");
    std::size_t keep = 0;
    if (options.fixed_rank) keep = rank;
    else
      while (keep < rank && all[keep].value >= options.floor * lead && all[keep].value > 0.0) ++keep;
    double kept2 = 0.0;
    values.resize(static_cast<Eigen::Index>(keep));
    for (std::size_t c = 0; c < keep; ++c) {
      values[static_cast<Eigen::Index>(c)] = std::max(all[c].value, options.floor * lead);
      kept2 += all[c].value * all[c].value;
      b.comp_t_.push_back(all[c].t);
      auto it = std::find(b.sm_used_.begin(), b.sm_used_.end(), all[c].sm);
      if (it == b.sm_used_.end()) {
        b.sm_used_.push_back(all[c].sm);
        b.comp_sm_.push_back(static_cast<int>(b.sm_used_.size()) - 1);
      } else {
        b.comp_sm_.push_back(static_cast<int>(it - b.sm_used_.begin()));
      }
    }
    b.sm_vectors_used_.resize(b.sm_vectors_.rows(), static_cast<Eigen::Index>(b.sm_used_.size()));
    for (std::size_t u = 0; u < b.sm_used_.size(); ++u)
      b.sm_vectors_used_.col(static_cast<Eigen::Index>(u)) = b.sm_vectors_.col(b.sm_used_[u]);
    b.residual_ = std::sqrt(std::max(0.0, total2 - kept2) / total2);
  } else {
    const Eigen::MatrixXd kuu = full_gram(k, grid);
    Eigen::MatrixXd shifted = kuu;
    shifted.diagonal().array() += options.jitter;
    EigenPairs pairs;
    if (3 * rank >= n) {
      pairs = dense_top_eigenpairs(shifted, rank);
    } else {
      pairs = lanczos_top_eigenpairs(shifted, rank, options.lanczos);
      if (!pairs.converged) {
        log::warn("Lanczos did not converge; using the dense eigensolver");
        pairs = dense_top_eigenpairs(shifted, rank);
        b.fallback_ = true;
      }
    }
    Eigen::VectorXd vals = pairs.values.array() - options.jitter;
    const double lead = vals[0];
    if (!(lead > 0.0)) throw std::runtime_error("kernel matrix has no positive eigenvalue");
    Eigen::Index keep = 0;
    if (options.fixed_rank) keep = vals.size();
    else
      while (keep < vals.size() && vals[keep] >= options.floor * lead && vals[keep] > 0.0) ++keep;
    values = vals.head(keep).cwiseMax(options.floor * lead);
    b.vectors_ = pairs.vectors.leftCols(keep);
    fix_signs(b.vectors_);
    canonicalize_degenerate(values, b.vectors_);
    const Eigen::MatrixXd approx = b.vectors_ * values.asDiagonal() * b.vectors_.transpose();
    b.residual_ = (kuu - approx).norm() / kuu.norm();
  }
  if (values.size() == 0) throw std::runtime_error("all eigenvalues fall below the floor");
  if (static_cast<std::size_t>(values.size()) < rank)
    log::warn("eigenvalue floor reduced the rank from " + std::to_string(rank) + " to " +
              std::to_string(values.size()));
  b.values_ = values;
  const double p = double(values.size());
  b.scale_ = std::sqrt(p) * values.cwiseInverse();
  return b;
}

Eigen::MatrixXd EigenBasis::grid_eigenvectors() const {
  if (!kronecker_) return vectors_;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(grid_size()), static_cast<Eigen::Index>(rank()));
  const auto rsm = sm_vectors_used_.rows();
  for (Eigen::Index c = 0; c < out.cols(); ++c)
    for (Eigen::Index i = 0; i < time_vectors_.rows(); ++i)
      out.col(c).segment(i * rsm, rsm) = time_vectors_(i, comp_t_[c]) * sm_vectors_used_.col(comp_sm_[c]);
  return out;
}

void EigenBasis::features(std::span<const TriggerInput> xs, Eigen::MatrixXd& out) const {
  const auto n = static_cast<Eigen::Index>(xs.size());
  const auto p = static_cast<Eigen::Index>(rank());
  out.resize(n, p);
  if (kronecker_) {
    const int rt = grid_.r_t;
    const int rsm = grid_.r_s * grid_.r_m;
    std::vector<double> tg(rt), sg(rsm), mg(rsm);
    for (int i = 0; i < rt; ++i) tg[i] = grid_.t_at(i);
    for (int j = 0; j < rsm; ++j) {
      sg[j] = grid_.s_at(j / grid_.r_m);
      mg[j] = grid_.m_at(j % grid_.r_m);
    }
    Eigen::MatrixXd kt, ksm, tproj, sproj;
    for (Eigen::Index start = 0; start < n; start += kChunk) {
      const Eigen::Index len = std::min(kChunk, n - start);
      kt.resize(len, rt);
      ksm.resize(len, rsm);
      for (Eigen::Index r = 0; r < len; ++r) {
        const TriggerInput& x = xs[static_cast<std::size_t>(start + r)];
        for (int i = 0; i < rt; ++i) kt(r, i) = kernel_.time_factor(x.dt, tg[i]);
        for (int j = 0; j < rsm; ++j) ksm(r, j) = kernel_.space_mark_factor(x.ds, x.m, sg[j], mg[j]);
      }
      tproj.noalias() = kt * time_vectors_;
      sproj.noalias() = ksm * sm_vectors_used_;
      for (Eigen::Index c = 0; c < p; ++c)
        out.col(c).segment(start, len) =
            scale_[c] * tproj.col(comp_t_[c]).cwiseProduct(sproj.col(comp_sm_[c]));
    }
    return;
  }
  const auto m = static_cast<Eigen::Index>(grid_size());
  std::vector<TriggerInput> pts(static_cast<std::size_t>(m));
  for (Eigen::Index j = 0; j < m; ++j) pts[static_cast<std::size_t>(j)] = grid_.point(static_cast<std::size_t>(j));
  Eigen::MatrixXd kxu;
  for (Eigen::Index start = 0; start < n; start += kChunk) {
    const Eigen::Index len = std::min(kChunk, n - start);
    kxu.resize(len, m);
    for (Eigen::Index r = 0; r < len; ++r)
      for (Eigen::Index j = 0; j < m; ++j)
        kxu(r, j) = kernel_(xs[static_cast<std::size_t>(start + r)], pts[static_cast<std::size_t>(j)]);
    out.middleRows(start, len).noalias() = kxu * vectors_;
  }
  out = out * scale_.asDiagonal();
}

Eigen::VectorXd EigenBasis::features(const TriggerInput& x) const {
  Eigen::MatrixXd row;
  features(std::span<const TriggerInput>(&x, 1), row);
  return row.row(0).transpose();
}

double EigenBasis::khat(const TriggerInput& x, const TriggerInput& y) const {
  const Eigen::VectorXd ex = features(x);
  const Eigen::VectorXd ey = features(y);
  return (eta().array() * ex.array() * ey.array()).sum();
}

double EigenBasis::ktilde(const TriggerInput& x, const TriggerInput& y, double a, double gamma) const {
  if (!(a > 0.0) || !(gamma >= 0.0)) throw std::invalid_argument("ktilde needs a > 0 and gamma >= 0");
  const Eigen::VectorXd ex = features(x);
  const Eigen::VectorXd ey = features(y);
  const Eigen::ArrayXd h = eta().array();
  return (h / (a * h + gamma) * ex.array() * ey.array()).sum();
}

void EigenBasis::save(std::ostream& out) const {
  out << "exhawkes_basis,1\n";
  out << "kernel," << kernel_.describe() << '\n';
  out << "grid," << grid_.r_t << ',' << grid_.r_s << ',' << grid_.r_m << ',' << stats::format_double(grid_.offset_t)
      << ',' << stats::format_double(grid_.offset_s) << ',' << stats::format_double(grid_.offset_m) << '\n';
  out << "info," << stats::format_double(residual_) << ',' << int(fallback_) << ',' << int(kronecker_) << '\n';
  write_row(out, "values", values_);
  write_row(out, "scale", scale_);
  if (kronecker_) {
    write_matrix(out, "time_vectors", time_vectors_);
    write_matrix(out, "sm_vectors", sm_vectors_used_);
    write_ints(out, "comp_t", comp_t_);
    write_ints(out, "comp_sm", comp_sm_);
    write_ints(out, "sm_used", sm_used_);
  } else {
    write_matrix(out, "vectors", vectors_);
  }
}

EigenBasis EigenBasis::load(std::istream& in) {
  EigenBasis b;
  const auto head = read_tagged(in, "exhawkes_basis");
  if (head.size() != 1 || head[0] != "1") throw std::runtime_error("unsupported basis file version");
  const auto kern = read_tagged(in, "kernel");
  if (kern.size() != 1) throw std::runtime_error("basis file: bad kernel line");
  b.kernel_ = CovarianceKernel::parse(kern[0]);
  const auto g = read_tagged(in, "grid");
  if (g.size() != 6) throw std::runtime_error("basis file: bad grid line");
  b.grid_ = InducingGrid{std::stoi(g[0]), std::stoi(g[1]), std::stoi(g[2]), stats::parse_double(g[3]),
                         stats::parse_double(g[4]), stats::parse_double(g[5])};
  b.grid_.validate();
  const auto info = read_tagged(in, "info");
  if (info.size() != 3) throw std::runtime_error("basis file: bad info line");
  b.residual_ = stats::parse_double(info[0]);
  b.fallback_ = info[1] == "1";
  b.kronecker_ = info[2] == "1";
  b.values_ = to_vector(read_tagged(in, "values"));
  b.scale_ = to_vector(read_tagged(in, "scale"));
  if (b.kronecker_) {
    b.time_vectors_ = read_matrix(in, "time_vectors");
    b.sm_vectors_used_ = read_matrix(in, "sm_vectors");
    b.comp_t_ = to_ints(read_tagged(in, "comp_t"));
    b.comp_sm_ = to_ints(read_tagged(in, "comp_sm"));
    b.sm_used_ = to_ints(read_tagged(in, "sm_used"));
  } else {
    b.vectors_ = read_matrix(in, "vectors");
  }
  if (b.scale_.size() != b.values_.size()) throw std::runtime_error("basis file: inconsistent sizes");
  return b;
}

std::string EigenBasis::cache_key(const CovarianceKernel& k, const InducingGrid& g, std::size_t rank,
                                  const DecomposeOptions& options) {
  std::ostringstream desc;
  desc << k.describe() << '|' << g.r_t << ',' << g.r_s << ',' << g.r_m << ',' << stats::format_double(g.offset_t)
       << ',' << stats::format_double(g.offset_s) << ',' << stats::format_double(g.offset_m) << '|' << rank << '|'
       << stats::format_double(options.jitter) << ',' << stats::format_double(options.floor) << ','
       << options.use_kronecker << ',' << options.fixed_rank;
  std::ostringstream hex;
  hex << std::hex;
  hex.width(16);
  hex.fill('0');
  hex << fnv1a(desc.str());
  return hex.str();
}

Eigen::VectorXd feature_map(const TriggerInput& x, const EigenBasis& basis) { return basis.features(x); }

double ktilde_eval(const TriggerInput& x, const TriggerInput& y, const EigenBasis& basis, double a, double gamma) {
  return basis.ktilde(x, y, a, gamma);
}

EigenBasis cached_decompose(const std::string& dir, const CovarianceKernel& k, const InducingGrid& grid,
                            std::size_t rank, const DecomposeOptions& options) {
  namespace fs = std::filesystem;
  const fs::path path = fs::path(dir) / ("basis_" + EigenBasis::cache_key(k, grid, rank, options) + ".csv");
  if (fs::exists(path)) {
    std::ifstream in(path);
    try {
      return EigenBasis::load(in);
    } catch (const std::exception& e) {
      log::warn("ignoring unreadable basis cache " + path.string() + ": " + e.what());
    }
  }
  EigenBasis b = decompose(k, grid, rank, options);
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  b.save(out);
  return b;
}

}  // namespace exhawkes::gp
