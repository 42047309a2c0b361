#include "skewlab/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "skewlab/error.hpp"

namespace skewlab {

namespace {

bool same_grid(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (std::abs(a[k] - b[k]) > 1e-12 * std::max(std::abs(a[k]), std::abs(b[k]))) return false;
  }
  return true;
}

void require_four_port(const SingleEndedNetwork& net, const char* op) {
  if (net.ports() != 4) {
    std::ostringstream os;
    os << op << " requires a 4-port network, got " << net.ports() << " ports";
    throw Error(ErrorCode::PortCountMismatch, os.str());
  }
}

// Canonical port order is {P left, P right, N left, N right}.
constexpr std::array<int, 2> kLeft{0, 2};
constexpr std::array<int, 2> kRight{1, 3};

Eigen::Matrix2cd block(const SMatrix& s, const std::array<int, 2>& rows, const std::array<int, 2>& cols) {
  Eigen::Matrix2cd m;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) m(r, c) = s(rows[r], cols[c]);
  return m;
}

void put_block(SMatrix& s, const std::array<int, 2>& rows, const std::array<int, 2>& cols,
               const Eigen::Matrix2cd& m) {
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) s(rows[r], cols[c]) = m(r, c);
}

bool nearly_singular(const Eigen::Matrix2cd& m) {
  const double norm2 = m.squaredNorm();
  return norm2 == 0.0 || std::abs(m.determinant()) < 1e-12 * norm2;
}

using TMatrix = Eigen::Matrix4cd;

// Maps right-side waves (b_R, a_R) to left-side waves (a_L, b_L).
TMatrix to_transfer(const SMatrix& s, double f) {
  const Eigen::Matrix2cd sll = block(s, kLeft, kLeft);
  const Eigen::Matrix2cd slr = block(s, kLeft, kRight);
  const Eigen::Matrix2cd srl = block(s, kRight, kLeft);
  const Eigen::Matrix2cd srr = block(s, kRight, kRight);
  if (nearly_singular(srl)) {
    std::ostringstream os;
    os << "transmission block not invertible at " << f << " Hz";
    throw Error(ErrorCode::SingularConversion, os.str());
  }
  const Eigen::Matrix2cd srl_inv = srl.inverse();
  TMatrix t;
  t.topLeftCorner<2, 2>() = srl_inv;
  t.topRightCorner<2, 2>() = -srl_inv * srr;
  t.bottomLeftCorner<2, 2>() = sll * srl_inv;
  t.bottomRightCorner<2, 2>() = slr - sll * srl_inv * srr;
  return t;
}

SMatrix from_transfer(const TMatrix& t, double f) {
  const Eigen::Matrix2cd t11 = t.topLeftCorner<2, 2>();
  const Eigen::Matrix2cd t12 = t.topRightCorner<2, 2>();
  const Eigen::Matrix2cd t21 = t.bottomLeftCorner<2, 2>();
  const Eigen::Matrix2cd t22 = t.bottomRightCorner<2, 2>();
  if (nearly_singular(t11)) {
    std::ostringstream os;
    os << "cascaded transfer matrix not invertible at " << f << " Hz";
    throw Error(ErrorCode::SingularConversion, os.str());
  }
  const Eigen::Matrix2cd srl = t11.inverse();
  SMatrix s(4, 4);
  put_block(s, kRight, kLeft, srl);
  put_block(s, kRight, kRight, -srl * t12);
  put_block(s, kLeft, kLeft, t21 * srl);
  put_block(s, kLeft, kRight, t22 - t21 * srl * t12);
  return s;
}

}  // namespace

void PortMap::validate() const {
  std::array<int, 4> idx{p_left, p_right, n_left, n_right};
  std::sort(idx.begin(), idx.end());
  if (idx != std::array<int, 4>{1, 2, 3, 4}) {
    throw Error(ErrorCode::InvalidArgument, "port map must be a permutation of {1,2,3,4}");
  }
}

std::array<int, 4> PortMap::zero_based() const {
  return {p_left - 1, p_right - 1, n_left - 1, n_right - 1};
}

SingleEndedNetwork::SingleEndedNetwork(std::vector<double> frequencies, std::vector<SMatrix> s, PortMap map)
    : frequencies_(std::move(frequencies)), s_(std::move(s)), map_(map) {
  if (frequencies_.empty()) throw Error(ErrorCode::InvalidArgument, "network has no frequency points");
  if (frequencies_.size() != s_.size()) {
    throw Error(ErrorCode::InvalidArgument, "frequency count does not match matrix count");
  }
  const auto n = s_.front().rows();
  if (n != 2 && n != 4) throw Error(ErrorCode::PortCountMismatch, "only 2- and 4-port networks are supported");
  for (std::size_t k = 0; k < s_.size(); ++k) {
    const double f = frequencies_[k];
    if (!std::isfinite(f) || f <= 0.0) {
      throw Error(ErrorCode::InvalidArgument, "frequencies must be finite and positive");
    }
    if (k > 0 && !(f > frequencies_[k - 1])) {
      std::ostringstream os;
      os << "frequency " << f << " Hz does not exceed previous " << frequencies_[k - 1] << " Hz";
      throw Error(ErrorCode::NonMonotonicFrequency, os.str());
    }
    if (s_[k].rows() != n || s_[k].cols() != n) {
      throw Error(ErrorCode::PortCountMismatch, "inconsistent matrix sizes across frequencies");
    }
    if (!s_[k].allFinite()) throw Error(ErrorCode::InvalidArgument, "non-finite S-parameter entry");
  }
  if (n == 4) map_.validate();
}

SingleEndedNetwork SingleEndedNetwork::canonical() const {
  if (ports() != 4 || map_.is_default()) return *this;
  const auto perm = map_.zero_based();
  std::vector<SMatrix> out;
  out.reserve(s_.size());
  for (const auto& m : s_) {
    SMatrix c(4, 4);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) c(a, b) = m(perm[a], perm[b]);
    out.push_back(std::move(c));
  }
  return SingleEndedNetwork(frequencies_, std::move(out));
}

SingleEndedNetwork SingleEndedNetwork::with_layout(const PortMap& map) const {
  if (ports() != 4 || map.is_default()) return relabeled(map);
  map.validate();
  const auto perm = map.zero_based();
  std::vector<SMatrix> out;
  out.reserve(s_.size());
  for (const auto& m : s_) {
    SMatrix c(4, 4);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) c(perm[a], perm[b]) = m(a, b);
    out.push_back(std::move(c));
  }
  return SingleEndedNetwork(frequencies_, std::move(out), map);
}

SingleEndedNetwork SingleEndedNetwork::relabeled(const PortMap& map) const {
  return SingleEndedNetwork(frequencies_, s_, map);
}

MixedModeNetwork to_mixed_mode(const SingleEndedNetwork& net) {
  require_four_port(net, "mixed-mode conversion");
  const SingleEndedNetwork c = net.canonical();
  const double r2 = 1.0 / std::sqrt(2.0);
  MixedModeNetwork mm;
  mm.frequencies = c.frequencies();
  const std::size_t n = c.size();
  for (auto* v : {&mm.sdd21, &mm.sdd12, &mm.scd21, &mm.scd12, &mm.scc21, &mm.scc12, &mm.sdc21, &mm.sdc12,
                  &mm.ssd21, &mm.ssd41, &mm.ssd12, &mm.ssd32}) {
    v->resize(n);
  }
  for (std::size_t k = 0; k < n; ++k) {
    auto S = [&](int i, int j) { return c.s(k, i, j); };
    mm.sdd21[k] = 0.5 * (S(2, 1) - S(2, 3) - S(4, 1) + S(4, 3));
    mm.scc21[k] = 0.5 * (S(2, 1) + S(2, 3) + S(4, 1) + S(4, 3));
    mm.scd21[k] = 0.5 * (S(2, 1) - S(2, 3) + S(4, 1) - S(4, 3));
    mm.sdc21[k] = 0.5 * (S(2, 1) + S(2, 3) - S(4, 1) - S(4, 3));
    mm.sdd12[k] = 0.5 * (S(1, 2) - S(1, 4) - S(3, 2) + S(3, 4));
    mm.scc12[k] = 0.5 * (S(1, 2) + S(1, 4) + S(3, 2) + S(3, 4));
    mm.scd12[k] = 0.5 * (S(1, 2) - S(1, 4) + S(3, 2) - S(3, 4));
    mm.sdc12[k] = 0.5 * (S(1, 2) + S(1, 4) - S(3, 2) - S(3, 4));
    mm.ssd21[k] = r2 * (S(2, 1) - S(2, 3));
    mm.ssd41[k] = r2 * (S(4, 3) - S(4, 1));
    mm.ssd12[k] = r2 * (S(1, 2) - S(1, 4));
    mm.ssd32[k] = r2 * (S(3, 4) - S(3, 2));
  }
  return mm;
}

SingleEndedNetwork cascade(const SingleEndedNetwork& a, const SingleEndedNetwork& b) {
  require_four_port(a, "cascade");
  require_four_port(b, "cascade");
  if (!same_grid(a.frequencies(), b.frequencies())) {
    throw Error(ErrorCode::GridMismatch, "cascade requires identical frequency grids");
  }
  const SingleEndedNetwork ca = a.canonical();
  const SingleEndedNetwork cb = b.canonical();
  std::vector<SMatrix> out;
  out.reserve(ca.size());
  for (std::size_t k = 0; k < ca.size(); ++k) {
    const double f = ca.frequencies()[k];
    out.push_back(from_transfer(to_transfer(ca.s(k), f) * to_transfer(cb.s(k), f), f));
  }
  return SingleEndedNetwork(ca.frequencies(), std::move(out)).with_layout(a.port_map());
}

SingleEndedNetwork resample(const SingleEndedNetwork& net, std::span<const double> grid) {
  const auto& f = net.frequencies();
  if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "empty resampling grid");
  std::vector<SMatrix> out;
  out.reserve(grid.size());
  for (double x : grid) {
    if (!(x >= f.front() && x <= f.back())) {
      std::ostringstream os;
      os << "frequency " << x << " Hz outside [" << f.front() << ", " << f.back() << "] Hz";
      throw Error(ErrorCode::GridOutOfRange, os.str());
    }
    auto hi = std::lower_bound(f.begin(), f.end(), x);
    const auto j = static_cast<std::size_t>(hi - f.begin());
    if (*hi == x) {
      out.push_back(net.s(j));
      continue;
    }
    const double w = (x - f[j - 1]) / (f[j] - f[j - 1]);
    out.push_back((1.0 - w) * net.s(j - 1) + w * net.s(j));
  }
  return SingleEndedNetwork({grid.begin(), grid.end()}, std::move(out), net.port_map());
}

ReciprocityReport reciprocity_metric(const SingleEndedNetwork& net) {
  ReciprocityReport rep;
  double num = 0.0;
  double den = 0.0;
  const int n = net.ports();
  for (std::size_t k = 0; k < net.size(); ++k) {
    const SMatrix& s = net.s(k);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double diff = std::abs(s(i, j) - s(j, i));
        num += diff * diff;
        den += std::norm(s(i, j) + s(j, i));
        if (diff > rep.max_abs_asymmetry) {
          rep.max_abs_asymmetry = diff;
          rep.worst_frequency = net.frequencies()[k];
          rep.worst_entry = {i + 1, j + 1};
        }
      }
    }
  }
  if (den == 0.0) {
    rep.quality = num == 0.0 ? 1.0 : 0.0;
  } else {
    rep.quality = std::clamp(1.0 - std::sqrt(num / den), 0.0, 1.0);
  }
  return rep;
}

SingleEndedNetwork enforce_reciprocity(const SingleEndedNetwork& net) {
  std::vector<SMatrix> out;
  out.reserve(net.size());
  for (const auto& m : net.matrices()) {
    SMatrix r = m;
    for (int i = 0; i < r.rows(); ++i) {
      for (int j = i + 1; j < r.cols(); ++j) {
        const cplx avg = 0.5 * (m(i, j) + m(j, i));
        r(i, j) = avg;
        r(j, i) = avg;
      }
    }
    out.push_back(std::move(r));
  }
  return SingleEndedNetwork(net.frequencies(), std::move(out), net.port_map());
}

std::vector<double> linear_grid(double start, double stop, double step) {
  if (!(step > 0.0) || !(stop >= start)) {
    throw Error(ErrorCode::InvalidArgument, "grid requires step > 0 and stop >= start");
  }
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> grid(count);
  for (std::size_t k = 0; k < count; ++k) grid[k] = start + static_cast<double>(k) * step;
  return grid;
}

double wrap_phase(double rad) {
  double w = std::remainder(rad, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

std::vector<double> unwrap_phase(std::span<const cplx> values, const std::vector<bool>& skip) {
  std::vector<double> out(values.size(), std::numeric_limits<double>::quiet_NaN());
  bool have = false;
  double last = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!skip.empty() && skip[k]) continue;
    const double p = std::arg(values[k]);
    if (!have) {
      last = wrap_phase(p);
      have = true;
    } else {
      last += wrap_phase(p - last);
    }
    out[k] = last;
  }
  return out;
}

}  // namespace skewlab
