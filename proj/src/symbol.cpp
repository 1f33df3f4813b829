#include "thickstab/symbol.hpp"

#include "numerics.hpp"
#include "thickstab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace thickstab {

struct MultiplierSymbol::Node {
  SymbolFamily family;
  double a = 0.0;  // s, c, mu, factor or h
  double b = 0.0;  // delta
  int p = 0;
  std::vector<double> xs, ys;
  std::shared_ptr<const Node> base;
  double inf_value = 0.0;
  double inf_argmin = 0.0;
  double r_cap = 1e8;
};

namespace {

using Node = MultiplierSymbol::Node;

double eval_node(const Node& n, double r) {
  switch (n.family) {
    case SymbolFamily::Fractional:
      return std::pow(r, 2.0 * n.a);
    case SymbolFamily::HalfHeat:
      return r;
    case SymbolFamily::LogLog:
      return std::pow(r, n.a) / std::pow(std::log(std::numbers::e + r), n.b);
    case SymbolFamily::Iterated:
      return r / IteratedLog(n.p).phi(r);
    case SymbolFamily::Saturating:
      return r / (1.0 + r);
    case SymbolFamily::Constant:
      return n.a;
    case SymbolFamily::Custom: {
      if (r <= n.xs.front()) return n.ys.front();
      if (r >= n.xs.back()) return n.ys.back();
      const auto it = std::upper_bound(n.xs.begin(), n.xs.end(), r);
      const std::size_t j = std::size_t(it - n.xs.begin());
      const double w = (r - n.xs[j - 1]) / (n.xs[j] - n.xs[j - 1]);
      return (1.0 - w) * n.ys[j - 1] + w * n.ys[j];
    }
    case SymbolFamily::Shifted:
      return eval_node(*n.base, r) - n.a;
    case SymbolFamily::Scaled:
      return n.a * eval_node(*n.base, r);
    case SymbolFamily::Dilated:
      return eval_node(*n.base, r / n.a);
  }
  return 0.0;
}

bool monotone_node(const Node& n) {
  switch (n.family) {
    case SymbolFamily::LogLog:
      // (e+t)log(e+t)/t >= 3.15 for t > 0, so delta <= 3s keeps F increasing.
      return n.b <= 3.0 * n.a;
    case SymbolFamily::Custom:
      return std::is_sorted(n.ys.begin(), n.ys.end());
    case SymbolFamily::Shifted:
    case SymbolFamily::Scaled:
    case SymbolFamily::Dilated:
      return monotone_node(*n.base);
    default:
      return true;
  }
}

bool log_convex_node(const Node& n) {
  switch (n.family) {
    case SymbolFamily::Fractional:
    case SymbolFamily::HalfHeat:
    case SymbolFamily::Constant:
      return true;
    case SymbolFamily::Shifted:
    case SymbolFamily::Scaled:
    case SymbolFamily::Dilated:
      return log_convex_node(*n.base);
    default:
      return false;
  }
}

std::optional<double> sup_node(const Node& n) {
  switch (n.family) {
    case SymbolFamily::Saturating:
      return 1.0;
    case SymbolFamily::Constant:
      return n.a;
    case SymbolFamily::Custom:
      return *std::max_element(n.ys.begin(), n.ys.end());
    case SymbolFamily::Shifted:
      if (auto s = sup_node(*n.base)) return *s - n.a;
      return std::nullopt;
    case SymbolFamily::Scaled:
      if (auto s = sup_node(*n.base)) return n.a * *s;
      return std::nullopt;
    case SymbolFamily::Dilated:
      return sup_node(*n.base);
    default:
      return std::nullopt;
  }
}

std::optional<double> limit_node(const Node& n) {
  switch (n.family) {
    case SymbolFamily::Saturating:
      return 1.0;
    case SymbolFamily::Constant:
      return n.a;
    case SymbolFamily::Custom:
      return n.ys.back();
    case SymbolFamily::Shifted:
      if (auto s = limit_node(*n.base)) return *s - n.a;
      return std::nullopt;
    case SymbolFamily::Scaled:
      if (auto s = limit_node(*n.base)) return n.a * *s;
      return std::nullopt;
    case SymbolFamily::Dilated:
      return limit_node(*n.base);
    default:
      return std::nullopt;
  }
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string name_node(const Node& n) {
  switch (n.family) {
    case SymbolFamily::Fractional:
      return "fractional(s=" + format_number(n.a) + ")";
    case SymbolFamily::HalfHeat:
      return "halfheat";
    case SymbolFamily::LogLog:
      return "loglog(s=" + format_number(n.a) + ",delta=" + format_number(n.b) + ")";
    case SymbolFamily::Iterated:
      return "iterated(p=" + std::to_string(n.p) + ")";
    case SymbolFamily::Saturating:
      return "saturating";
    case SymbolFamily::Constant:
      return "constant(c=" + format_number(n.a) + ")";
    case SymbolFamily::Custom:
      return "custom(nodes=" + std::to_string(n.xs.size()) + ")";
    case SymbolFamily::Shifted:
      return "shifted(" + name_node(*n.base) + ",mu=" + format_number(n.a) + ")";
    case SymbolFamily::Scaled:
      return "scaled(" + name_node(*n.base) + ",factor=" + format_number(n.a) + ")";
    case SymbolFamily::Dilated:
      return "dilated(" + name_node(*n.base) + ",h=" + format_number(n.a) + ")";
  }
  return "unknown";
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw InvalidArgument(std::string(what) + " must be finite");
}

}  // namespace

MultiplierSymbol::MultiplierSymbol(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

MultiplierSymbol MultiplierSymbol::finish(std::shared_ptr<Node> node) {
  const double r_max = node->family == SymbolFamily::Custom ? std::max(node->xs.back(), 1.0) : 100.0;
  const InfResult r = inf_F(MultiplierSymbol(node), r_max, 4096);
  node->inf_value = r.value;
  node->inf_argmin = r.argmin;
  return MultiplierSymbol(std::move(node));
}

MultiplierSymbol MultiplierSymbol::fractional(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("fractional: s must be positive");
  auto n = std::make_shared<Node>();
  n->family = SymbolFamily::Fractional;
  n->a = s;
  return finish(n);
}

MultiplierSymbol MultiplierSymbol::halfheat() {
  auto n = std::make_shared<Node>();
  n->family = SymbolFamily::HalfHeat;
  return finish(n);
}

MultiplierSymbol MultiplierSymbol::loglog(double s, double delta) {
  if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("loglog: s must be positive");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw InvalidArgument("loglog: delta must be >= 0");
  auto n = std::make_shared<Node>();
  n->family = SymbolFamily::LogLog;
  n->a = s;
  n->b = delta;
  return finish(n);
}

MultiplierSymbol MultiplierSymbol::iterated(int p) {
  if (p < 1) throw InvalidArgument("iterated: p must be >= 1");
  auto n = std::make_shared<Node>();
  n->family = SymbolFamily::Iterated;
  n->p = p;
  return finish(n);
}

MultiplierSymbol MultiplierSymbol::saturating() {
  auto n = std::make_shared<Node>();
  n->family = SymbolFamily::Saturating;
  return finish(n);
}

MultiplierSymbol MultiplierSymbol::constant(double c) {
  require_finite(c, "constant: c");
  auto n = std::make_shared<Node>();
  n->family = SymbolFamily::Constant;
  n->a = c;
  return finish(n);
}

MultiplierSymbol MultiplierSymbol::custom(std::vector<double> r, std::vector<double> values) {
  if (r.size() < 2 || r.size() != values.size())
    throw InvalidArgument("custom: need >= 2 nodes with matching value count");
  for (std::size_t i = 0; i < r.size(); ++i) {
    require_finite(r[i], "custom: node");
    require_finite(values[i], "custom: value");
    if (r[i] < 0.0) throw InvalidArgument("custom: nodes must be >= 0");
    if (i > 0 && !(r[i] > r[i - 1])) throw InvalidArgument("custom: nodes must increase strictly");
  }
  auto n = std::make_shared<Node>();
  n->family = SymbolFamily::Custom;
  n->xs = std::move(r);
  n->ys = std::move(values);
  return finish(n);
}

MultiplierSymbol MultiplierSymbol::shifted(const MultiplierSymbol& base, double mu) {
  require_finite(mu, "shifted: mu");
  auto n = std::make_shared<Node>();
  n->family = SymbolFamily::Shifted;
  n->a = mu;
  n->base = base.node_;
  n->r_cap = base.r_cap();
  n->inf_value = base.inf_value() - mu;
  n->inf_argmin = base.inf_argmin();
  return MultiplierSymbol(std::move(n));
}

MultiplierSymbol MultiplierSymbol::scaled(const MultiplierSymbol& base, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw InvalidArgument("scaled: factor must be positive");
  auto n = std::make_shared<Node>();
  n->family = SymbolFamily::Scaled;
  n->a = factor;
  n->base = base.node_;
  n->r_cap = base.r_cap();
  n->inf_value = factor * base.inf_value();
  n->inf_argmin = base.inf_argmin();
  return MultiplierSymbol(std::move(n));
}

MultiplierSymbol MultiplierSymbol::dilated(const MultiplierSymbol& base, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("dilated: h must be positive");
  auto n = std::make_shared<Node>();
  n->family = SymbolFamily::Dilated;
  n->a = h;
  n->base = base.node_;
  n->r_cap = base.r_cap() * h;
  n->inf_value = base.inf_value();
  n->inf_argmin = base.inf_argmin() * h;
  return MultiplierSymbol(std::move(n));
}

double MultiplierSymbol::operator()(double r) const {
  if (!(r >= 0.0)) throw InvalidArgument("symbol evaluated at negative or NaN radius");
  return eval_node(*node_, r);
}

SymbolFamily MultiplierSymbol::family() const noexcept { return node_->family; }
std::string MultiplierSymbol::name() const { return name_node(*node_); }
double MultiplierSymbol::inf_value() const noexcept { return node_->inf_value; }
double MultiplierSymbol::inf_argmin() const noexcept { return node_->inf_argmin; }
bool MultiplierSymbol::monotone_tail() const noexcept { return monotone_node(*node_); }
bool MultiplierSymbol::log_convex() const noexcept { return log_convex_node(*node_); }
std::optional<double> MultiplierSymbol::sup_value() const noexcept { return sup_node(*node_); }
std::optional<double> MultiplierSymbol::limit_at_infinity() const noexcept { return limit_node(*node_); }
double MultiplierSymbol::r_cap() const noexcept { return node_->r_cap; }
double MultiplierSymbol::parameter() const noexcept { return node_->a; }

std::optional<MultiplierSymbol> MultiplierSymbol::base() const {
  if (!node_->base) return std::nullopt;
  return MultiplierSymbol(node_->base);
}

IteratedLog::IteratedLog(int p) : p_(p) {
  if (p < 1) throw InvalidArgument("iterated log: p must be >= 1");
}

double IteratedLog::g(double t) { return std::log(std::numbers::e + t); }

double IteratedLog::phi(double t) const {
  double prod = 1.0, u = t;
  for (int i = 0; i < p_; ++i) {
    u = g(u);
    prod *= u;
  }
  return prod;
}

double IteratedLog::phi_log_derivative(double t) const {
  // (g^{oi})' = prod_{j<i} 1/(e + g^{oj}), summed against 1/g^{oi}.
  double sum = 0.0, chain = 1.0, u = t;
  for (int i = 0; i < p_; ++i) {
    chain /= std::numbers::e + u;
    u = g(u);
    sum += chain / u;
  }
  return sum;
}

double IteratedLog::symbol_derivative(double t) const {
  return (1.0 - t * phi_log_derivative(t)) / phi(t);
}

InfResult inf_F(const MultiplierSymbol& F, double r_max, int grid_points) {
  if (!(r_max > 0.0)) throw InvalidArgument("inf_F: r_max must be positive");
  const auto base = F.base();
  switch (F.family()) {
    case SymbolFamily::Shifted: {
      const MultiplierSymbol& b = *base;
      InfResult r = inf_F(b, r_max, grid_points);
      r.value -= F.parameter();
      return r;
    }
    case SymbolFamily::Scaled: {
      const MultiplierSymbol& b = *base;
      InfResult r = inf_F(b, r_max, grid_points);
      r.value *= F.parameter();
      return r;
    }
    case SymbolFamily::Dilated: {
      const MultiplierSymbol& b = *base;
      InfResult r = inf_F(b, r_max / F.parameter(), grid_points);
      r.argmin *= F.parameter();
      return r;
    }
    default:
      break;
  }
  const auto f = [&](double r) { return F(r); };
  const auto best = detail::scan_minimize(f, 0.0, r_max, std::max(grid_points, 3), 1e-12);
  bool reliable = true;
  if (!F.monotone_tail()) {
    const double tol = 1e-12 * (1.0 + std::abs(best.value));
    for (double r = 2.0 * r_max; r <= F.r_cap(); r *= 2.0)
      if (F(r) < best.value - tol) reliable = false;
  }
  return {best.value, best.x, reliable};
}

double alpha_R(const MultiplierSymbol& F, double R, double r_max, int grid_points) {
  if (!(R > 0.0)) throw InvalidArgument("alpha_R: R must be positive");
  if (!(r_max > R)) throw InvalidArgument("alpha_R: r_max must exceed R");
  const auto base = F.base();
  switch (F.family()) {
    case SymbolFamily::Shifted: {
      const MultiplierSymbol& b = *base;
      return alpha_R(b, R, r_max, grid_points) - F.parameter();
    }
    case SymbolFamily::Scaled: {
      const MultiplierSymbol& b = *base;
      return F.parameter() * alpha_R(b, R, r_max, grid_points);
    }
    case SymbolFamily::Dilated: {
      const MultiplierSymbol& b = *base;
      return alpha_R(b, R / F.parameter(), r_max / F.parameter(), grid_points);
    }
    default:
      break;
  }
  const auto f = [&](double r) { return F(r); };
  const auto best = detail::scan_minimize(f, R, r_max, std::max(grid_points, 3), 1e-12);
  if (!F.monotone_tail()) {
    const double tol = 1e-12 * (1.0 + std::abs(best.value));
    for (double r = 2.0 * r_max; r <= F.r_cap(); r *= 2.0)
      if (F(r) < best.value - tol)
        throw NumericalFailure("alpha_R: symbol drops below the scanned minimum beyond r_max = " +
                               std::to_string(r_max));
  }
  return best.value;
}

double alpha_R(const MultiplierSymbol& F, double R) {
  return alpha_R(F, R, std::max(10.0 * R, 100.0), 4096);
}

}  // namespace thickstab
