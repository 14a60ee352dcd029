#include "dtraj/lattice_counting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include <boost/math/constants/constants.hpp>

#include "dtraj/errors.hpp"

namespace dtraj {

namespace {

using std::abs;
using std::cos;
using std::sin;

int mod(long long x, long long n) {
  const long long r = x % n;
  return static_cast<int>(r < 0 ? r + n : r);
}

std::string vec_str(std::span<const int> v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + ")";
}

// sin and cos of pi k / d for k in [0, 2d), exact zeros where they belong.
template <class Real>
struct TrigTable {
  std::vector<Real> s, c;
};

template <class Real>
std::shared_ptr<const TrigTable<Real>> trig_table(int d) {
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const TrigTable<Real>>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[d];
  if (slot) return slot;
  auto t = std::make_shared<TrigTable<Real>>();
  const Real pi = boost::math::constants::pi<Real>();
  t->s.resize(2 * d);
  t->c.resize(2 * d);
  for (int k = 0; k < 2 * d; ++k) {
    const Real x = pi * Real(k) / Real(d);
    t->s[k] = k % d == 0 ? Real(0) : Real(sin(x));
    t->c[k] = (2 * k) % d == 0 && ((2 * k) / d) % 2 == 1 ? Real(0) : Real(cos(x));
  }
  slot = std::move(t);
  return slot;
}

template <class Real>
Real ipow(Real x, unsigned m) {
  Real r(1);
  while (m) {
    if (m & 1u) r *= x;
    m >>= 1;
    if (m) x *= x;
  }
  return r;
}

// Neumaier's variant of Kahan summation.
template <class Real>
struct CompensatedSum {
  Real sum = 0;
  Real comp = 0;
  void add(const Real& x) {
    const Real t = sum + x;
    if (abs(sum) >= abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  void add(const CompensatedSum& o) {
    add(o.sum);
    add(o.comp);
  }
  Real value() const { return sum + comp; }
};

template <class Real>
struct RawSum {
  Real value = 0;
  Real magnitude = 0;  // sum of |terms|, drives the error estimate
};

template <class Real>
Real error_estimate(const Real& magnitude, unsigned m, std::size_t n) {
  const Real eps = std::numeric_limits<Real>::epsilon();
  return magnitude * Real(4 * (m + 16 + 4 * n)) * eps;
}

void check_interior(int d, int x, const char* what) {
  if (d < 2) throw DomainError("corridor parameter d must be >= 2, got " + std::to_string(d));
  if (x < 1 || x > d - 1) {
    throw DomainError(std::string(what) + " position " + std::to_string(x) +
                      " is not interior to the corridor 1.." + std::to_string(d - 1));
  }
}

template <class Real>
RawSum<Real> sum_1d(int d, int a, int b, unsigned m) {
  check_interior(d, a, "start");
  check_interior(d, b, "end");
  const auto tab = trig_table<Real>(d);
  CompensatedSum<Real> acc;
  Real magnitude = 0;
  for (int w = 1; w < d; ++w) {
    const Real& sa = tab->s[mod(static_cast<long long>(w) * a, 2 * d)];
    const Real& sb = tab->s[mod(static_cast<long long>(w) * b, 2 * d)];
    const Real term = sb * ipow(Real(1) + 2 * tab->c[w], m) * sa;
    acc.add(term);
    magnitude += abs(term);
  }
  const Real scale = Real(2) / Real(d);
  return {acc.value() * scale, magnitude * scale};
}

PathCount count_from_double(const RawSum<double>& r, unsigned m, std::size_t n) {
  if (!std::isfinite(r.value) || !std::isfinite(r.magnitude)) {
    throw NumericalOverflow("double precision corridor sum overflowed");
  }
  const double bound = error_estimate(r.magnitude, m, n);
  if (bound < 0.25) return ClosedFormValue{HighReal(r.value), HighReal(bound)}.to_count();
  if (r.value == 0.0) return PathCount::approx(0, 0.0, 0.0);
  return PathCount::approx(r.value > 0 ? 1 : -1, std::log10(std::abs(r.value)),
                           bound / std::abs(r.value));
}

void check_spec_points(const CorridorSpec& spec, std::span<const int> a, std::span<const int> b) {
  spec.validate();
  const std::size_t n = spec.dimension();
  if (a.size() != n || b.size() != n) {
    throw DomainError("start and end must have dimension " + std::to_string(n));
  }
  for (std::size_t j = 0; j < n; ++j) {
    check_interior(spec.d[j], a[j], "start");
    check_interior(spec.d[j], b[j], "end");
  }
}

struct AxisTerm {
  int omega;
  std::size_t table_sa, table_phase, table_cos;
};

template <class Real>
RawSum<Real> sum_nd_direct(const CorridorSpec& spec, std::span<const int> a,
                           std::span<const int> b, unsigned m, const NdOptions& opt) {
  const std::size_t n = spec.dimension();
  if (!spec.move_set.is_reflection_symmetric()) {
    throw DomainError("the direct corridor sum needs a move set symmetric under axis reflection");
  }

  std::vector<std::shared_ptr<const TrigTable<Real>>> tabs;
  std::vector<std::vector<AxisTerm>> axes(n);
  double terms = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    const int d = spec.d[j];
    tabs.push_back(trig_table<Real>(d));
    for (int w = -d + 1; w <= d; ++w) {
      const int ka = mod(static_cast<long long>(w) * a[j], 2 * d);
      if (ka % d == 0) continue;  // sin(pi w a / d) vanishes identically
      axes[j].push_back(AxisTerm{w, static_cast<std::size_t>(ka),
                                 static_cast<std::size_t>(mod(static_cast<long long>(w) * b[j], 2 * d)),
                                 static_cast<std::size_t>(mod(w, 2 * d))});
    }
    terms *= static_cast<double>(axes[j].size());
  }
  if (terms > static_cast<double>(opt.max_terms)) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "direct corridor sum needs %.3g terms, budget is %zu", terms,
                  opt.max_terms);
    throw ResourceLimit(buf);
  }

  // Nonnegative moves as bit masks over the axes.
  std::vector<unsigned> plus_masks;
  const MoveSet plus = nonnegative_subset(spec.move_set);
  for (const auto& mv : plus.moves()) {
    unsigned mask = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (mv[j] == 1) mask |= 1u << j;
    }
    plus_masks.push_back(mask);
  }

  const bool even = n % 2 == 0;
  const std::size_t outer = axes[0].size();
  std::vector<CompensatedSum<Real>> partial(outer);
  std::vector<Real> partial_mag(outer, Real(0));

  auto run_block = [&](std::size_t lo, std::size_t hi) {
    std::vector<std::size_t> idx(n, 0);
    std::vector<Real> twocos(n);
    for (std::size_t i0 = lo; i0 < hi; ++i0) {
      bool empty = false;
      for (std::size_t j = 1; j < n; ++j) empty = empty || axes[j].empty();
      if (empty) continue;
      std::fill(idx.begin(), idx.end(), 0);
      idx[0] = i0;
      CompensatedSum<Real> acc;
      Real mag = 0;
      while (true) {
        Real sines = 1, re = 1, im = 0;
        for (std::size_t j = 0; j < n; ++j) {
          const AxisTerm& t = axes[j][idx[j]];
          const auto& tab = *tabs[j];
          sines *= tab.s[t.table_sa];
          const Real c = tab.c[t.table_phase];
          const Real s = tab.s[t.table_phase];
          const Real nre = re * c - im * s;
          im = re * s + im * c;
          re = nre;
          twocos[j] = 2 * tab.c[t.table_cos];
        }
        Real kernel = 0;
        for (unsigned mask : plus_masks) {
          Real p = 1;
          for (std::size_t j = 0; j < n; ++j) {
            if (mask & (1u << j)) p *= twocos[j];
          }
          kernel += p;
        }
        const Real term = sines * ipow(kernel, m) * (even ? re : im);
        acc.add(term);
        mag += abs(term);

        bool done = true;
        for (std::size_t j = n; j-- > 1;) {
          if (++idx[j] < axes[j].size()) {
            done = false;
            break;
          }
          idx[j] = 0;
        }
        if (done) break;
      }
      partial[i0] = acc;
      partial_mag[i0] = mag;
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(opt.workers, 1, std::max<std::size_t>(outer, 1));
  if (workers <= 1) {
    run_block(0, outer);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (outer + workers - 1) / workers;
    for (std::size_t lo = 0; lo < outer; lo += chunk) {
      pool.emplace_back(run_block, lo, std::min(outer, lo + chunk));
    }
  }

  CompensatedSum<Real> total;
  Real magnitude = 0;
  for (std::size_t i = 0; i < outer; ++i) {
    total.add(partial[i]);
    magnitude += partial_mag[i];
  }
  Real scale = 1;
  for (int d : spec.d) scale *= Real(d);
  const std::size_t half = even ? n / 2 : (n - 1) / 2;
  const Real sign = half % 2 == 0 ? Real(1) : Real(-1);
  return {sign * total.value() / scale, magnitude / scale};
}

}  // namespace

MoveSet::MoveSet(std::size_t dimension, std::vector<std::vector<int>> moves)
    : dimension_(dimension), moves_(std::move(moves)) {
  if (dimension_ == 0) throw DomainError("move set dimension must be >= 1");
  for (const auto& mv : moves_) {
    if (mv.size() != dimension_) throw DomainError("move " + vec_str(mv) + " has wrong dimension");
    for (int c : mv) {
      if (c < -1 || c > 1) throw DomainError("move " + vec_str(mv) + " has a component outside {-1,0,1}");
    }
  }
  std::sort(moves_.begin(), moves_.end());
  if (std::adjacent_find(moves_.begin(), moves_.end()) != moves_.end()) {
    throw DomainError("move set contains duplicate moves");
  }
}

bool MoveSet::contains(std::span<const int> move) const {
  const std::vector<int> key(move.begin(), move.end());
  return std::binary_search(moves_.begin(), moves_.end(), key);
}

bool MoveSet::contains_zero() const { return contains(std::vector<int>(dimension_, 0)); }

bool MoveSet::is_full() const {
  double full = 1.0;
  for (std::size_t j = 0; j < dimension_; ++j) full *= 3.0;
  return static_cast<double>(moves_.size()) == full;
}

bool MoveSet::is_reflection_symmetric() const {
  for (const auto& mv : moves_) {
    for (std::size_t j = 0; j < dimension_; ++j) {
      auto flipped = mv;
      flipped[j] = -flipped[j];
      if (!contains(flipped)) return false;
    }
  }
  return true;
}

MoveSet full_move_set(std::size_t n) {
  if (n < 1 || n > kMaxMoveSetDimension) {
    throw DomainError("full move set dimension must be in 1.." +
                      std::to_string(kMaxMoveSetDimension));
  }
  std::vector<std::vector<int>> moves;
  std::vector<int> mv(n, -1);
  while (true) {
    moves.push_back(mv);
    std::size_t j = n;
    while (j > 0 && mv[j - 1] == 1) mv[--j] = -1;
    if (j == 0) break;
    ++mv[j - 1];
  }
  return MoveSet(n, std::move(moves));
}

MoveSet axis_move_set(std::size_t n) {
  if (n < 1) throw DomainError("move set dimension must be >= 1");
  std::vector<std::vector<int>> moves{std::vector<int>(n, 0)};
  for (std::size_t j = 0; j < n; ++j) {
    for (int s : {-1, 1}) {
      std::vector<int> mv(n, 0);
      mv[j] = s;
      moves.push_back(std::move(mv));
    }
  }
  return MoveSet(n, std::move(moves));
}

MoveSet nonnegative_subset(const MoveSet& ms) {
  std::vector<std::vector<int>> keep;
  for (const auto& mv : ms.moves()) {
    if (std::all_of(mv.begin(), mv.end(), [](int c) { return c >= 0; })) keep.push_back(mv);
  }
  return MoveSet(ms.dimension(), std::move(keep));
}

void CorridorSpec::validate() const {
  if (d.empty()) throw DomainError("corridor needs at least one axis");
  if (d.size() != move_set.dimension()) {
    throw DomainError("corridor has " + std::to_string(d.size()) + " axes but the move set has dimension " +
                      std::to_string(move_set.dimension()));
  }
  for (int dj : d) {
    if (dj < 2) throw DomainError("corridor parameter d must be >= 2, got " + std::to_string(dj));
  }
}

ClosedFormValue corridor_sum_1d(int d, int a, int b, unsigned m) {
  const auto r = sum_1d<HighReal>(d, a, b, m);
  return {r.value, error_estimate(r.magnitude, m, 1)};
}

PathCount corridor_count_1d(int d, int a, int b, unsigned m) {
  return corridor_sum_1d(d, a, b, m).to_count();
}

PathCount corridor_count_dp(const CorridorSpec& spec, std::span<const int> a,
                            std::span<const int> b, unsigned m, std::size_t max_cells) {
  check_spec_points(spec, a, b);
  const std::size_t n = spec.dimension();
  std::vector<std::size_t> extent(n), stride(n);
  double cells_f = 1.0;
  std::size_t cells = 1;
  for (std::size_t j = n; j-- > 0;) {
    extent[j] = static_cast<std::size_t>(spec.d[j] - 1);
    stride[j] = cells;
    cells_f *= static_cast<double>(extent[j]);
    if (cells_f > static_cast<double>(max_cells)) {
      throw ResourceLimit("corridor DP needs more than " + std::to_string(max_cells) + " cells");
    }
    cells *= extent[j];
  }

  auto flat = [&](std::span<const int> p) {
    std::size_t f = 0;
    for (std::size_t j = 0; j < n; ++j) f += static_cast<std::size_t>(p[j] - 1) * stride[j];
    return f;
  };

  std::vector<BigInt> cur(cells), next(cells);
  cur[flat(a)] = 1;
  const auto& moves = spec.move_set.moves();
  std::vector<int> coord(n);
  for (unsigned step = 0; step < m; ++step) {
    for (auto& x : next) x = 0;
    std::fill(coord.begin(), coord.end(), 0);
    for (std::size_t f = 0; f < cells; ++f) {
      if (f > 0) {
        for (std::size_t j = n; j-- > 0;) {
          if (++coord[j] < static_cast<int>(extent[j])) break;
          coord[j] = 0;
        }
      }
      if (cur[f].is_zero()) continue;
      for (const auto& mv : moves) {
        std::ptrdiff_t target = static_cast<std::ptrdiff_t>(f);
        bool inside = true;
        for (std::size_t j = 0; j < n && inside; ++j) {
          const int c = coord[j] + mv[j];
          inside = c >= 0 && c < static_cast<int>(extent[j]);
          target += static_cast<std::ptrdiff_t>(mv[j]) * static_cast<std::ptrdiff_t>(stride[j]);
        }
        if (inside) next[static_cast<std::size_t>(target)] += cur[f];
      }
    }
    cur.swap(next);
  }
  return PathCount::exact(cur[flat(b)]);
}

double t_hat(std::span<const int> omega, std::span<const int> d, const MoveSet& ms) {
  if (omega.size() != d.size() || d.size() != ms.dimension()) {
    throw DomainError("t_hat dimensions do not match");
  }
  double total = 0.0;
  const MoveSet plus = nonnegative_subset(ms);
  for (const auto& mv : plus.moves()) {
    double p = 1.0;
    for (std::size_t j = 0; j < d.size(); ++j) {
      if (mv[j] == 1) p *= 2.0 * std::cos(kPi * omega[j] / d[j]);
    }
    total += p;
  }
  return total;
}

HighReal t_hat_high(std::span<const int> omega, std::span<const int> d, const MoveSet& ms) {
  if (omega.size() != d.size() || d.size() != ms.dimension()) {
    throw DomainError("t_hat dimensions do not match");
  }
  HighReal total = 0;
  const MoveSet plus = nonnegative_subset(ms);
  for (const auto& mv : plus.moves()) {
    HighReal p = 1;
    for (std::size_t j = 0; j < d.size(); ++j) {
      if (mv[j] == 1) p *= 2 * trig_table<HighReal>(d[j])->c[mod(omega[j], 2 * d[j])];
    }
    total += p;
  }
  return total;
}

ClosedFormValue corridor_sum_nd_direct(const CorridorSpec& spec, std::span<const int> a,
                                       std::span<const int> b, unsigned m,
                                       const NdOptions& options) {
  check_spec_points(spec, a, b);
  if (options.precision == Precision::kDouble) {
    const auto r = sum_nd_direct<double>(spec, a, b, m, options);
    return {HighReal(r.value), HighReal(error_estimate(r.magnitude, m, spec.dimension()))};
  }
  const auto r = sum_nd_direct<HighReal>(spec, a, b, m, options);
  return {r.value, error_estimate(r.magnitude, m, spec.dimension())};
}

PathCount corridor_count_factorized(const CorridorSpec& spec, std::span<const int> a,
                                    std::span<const int> b, unsigned m, Precision precision) {
  check_spec_points(spec, a, b);
  if (!spec.move_set.is_full()) {
    throw DomainError("the factorized corridor count needs the full diagonal move set");
  }
  PathCount total = PathCount::exact(BigInt(1));
  for (std::size_t j = 0; j < spec.dimension(); ++j) {
    if (precision == Precision::kDouble) {
      total = total * count_from_double(sum_1d<double>(spec.d[j], a[j], b[j], m), m, 1);
    } else {
      total = total * corridor_count_1d(spec.d[j], a[j], b[j], m);
    }
  }
  return total;
}

PathCount corridor_count_nd(const CorridorSpec& spec, std::span<const int> a,
                            std::span<const int> b, unsigned m, const NdOptions& options) {
  check_spec_points(spec, a, b);
  const bool full = spec.move_set.is_full();
  NdMethod method = options.method;
  if (method == NdMethod::kAuto) method = full ? NdMethod::kFactorized : NdMethod::kDirect;
  if (method == NdMethod::kFactorized) return corridor_count_factorized(spec, a, b, m, options.precision);

  if (options.precision == Precision::kDouble) {
    const auto r = sum_nd_direct<double>(spec, a, b, m, options);
    return count_from_double(r, m, spec.dimension());
  }
  const ClosedFormValue direct = corridor_sum_nd_direct(spec, a, b, m, options);
  if (full) {
    const PathCount product = corridor_count_factorized(spec, a, b, m);
    HighReal ref = product.is_exact() ? HighReal(product.value())
                                      : HighReal(product.sign()) * pow(HighReal(10), product.log10());
    const HighReal diff = abs(direct.value - ref);
    const HighReal scale = std::max(abs(ref), HighReal(1));
    if (diff > scale * HighReal(options.agreement_tolerance) + direct.error_bound) {
      throw NumericalOverflow("direct corridor sum " + direct.value.str(12) +
                              " disagrees with the per-axis product " + ref.str(12));
    }
  }
  return direct.to_count();
}

int CorridorMapping::index(double angle) const {
  const int idx = static_cast<int>(std::lround(angle / delta_q)) + offset;
  if (idx < 1 || idx > d - 1) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "angle %.6g deg maps to corridor index %d, outside 1..%d",
                  angle / kDegToRad, idx, d - 1);
    throw DomainError(buf);
  }
  return idx;
}

CorridorMapping joint_to_corridor(const JointSpec& joint) {
  joint.validate();
  const double span = (joint.q_max - joint.q_min) / joint.delta_q;
  const long cells = std::lround(span);
  if (std::abs(span - static_cast<double>(cells)) > 1e-6) {
    throw DomainError("joint range of " + joint.name + " is not a multiple of its resolution");
  }
  CorridorMapping map;
  map.d = static_cast<int>(cells) + 1;
  map.delta_q = joint.delta_q;
  if (map.d % 2 == 0) {
    map.offset = map.d / 2;
    map.convention = "index = round(q/dq) + d/2 (d even)";
  } else {
    map.offset = (map.d - 1) / 2 + 1;
    map.convention = "index = round(q/dq) + (d-1)/2 + 1 (d odd)";
  }
  return map;
}

double approx_count_log10(std::span<const std::size_t> per_axis_counts, unsigned m,
                          std::size_t n) {
  if (n < 1) throw DomainError("approximate count needs n >= 1");
  double log_a = 0.0;
  for (std::size_t c : per_axis_counts) {
    if (c == 0) throw DomainError("action count must be positive");
    log_a += std::log10(static_cast<double>(c));
  }
  return static_cast<double>(m) * log_a - static_cast<double>(n) * std::log10(2.0 * m + 1.0);
}

ScalingTable scaling_table(const JointSpec& joint, std::span<const unsigned> n_values,
                           unsigned m_min, unsigned m_max, double separation) {
  if (m_min > m_max) throw DomainError("empty step range");
  const CorridorMapping map = joint_to_corridor(joint);
  const double cells = separation / joint.delta_q;
  if (std::abs(cells - std::round(cells)) > 1e-6) {
    throw DomainError("separation must be a multiple of the joint resolution");
  }
  const int a = map.index(0.0);
  const int b = map.index(separation);
  const unsigned min_steps = static_cast<unsigned>(std::abs(b - a));

  ScalingTable table;
  table.convention = map.convention;
  for (unsigned n : n_values) {
    if (n < 1) throw DomainError("dof count must be >= 1");
    const std::string series = std::to_string(n);
    const std::vector<std::size_t> per_axis(n, 3);
    for (unsigned m = m_min; m <= m_max; ++m) {
      ScalingRow row{series, std::to_string(m), std::nullopt, ""};
      if (m < min_steps) {
        row.method = "unreachable";
      } else if (n <= 3) {
        const PathCount one = corridor_count_1d(map.d, a, b, m);
        PathCount total = PathCount::exact(BigInt(1));
        for (unsigned j = 0; j < n; ++j) total = total * one;
        row.log10_count = total.log10();
        row.method = "closed_form";
      } else if (m == min_steps) {
        row.log10_count = 0.0;
        row.method = "forced";
      } else {
        row.log10_count = approx_count_log10(per_axis, m, n);
        row.method = "approx";
      }
      table.rows.push_back(std::move(row));
    }
  }
  for (unsigned m = m_min; m <= m_max; ++m) {
    table.rows.push_back(
        ScalingRow{"go", std::to_string(m), m * std::log10(361.0), "reference"});
  }
  table.rows.push_back(ScalingRow{"atoms", "*", 80.0, "reference"});
  return table;
}

std::string scaling_csv(const ScalingTable& table) {
  std::string out = "n,m,log10_count,method\n";
  char buf[64];
  for (const auto& r : table.rows) {
    out += r.series + "," + r.m + ",";
    if (r.log10_count) {
      std::snprintf(buf, sizeof buf, "%.6f", *r.log10_count);
      out += buf;
    }
    out += "," + r.method + "\n";
  }
  return out;
}

}  // namespace dtraj
