#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace thickstab {

enum class SymbolFamily {
  Fractional,  // r^{2s}
  HalfHeat,    // r
  LogLog,      // r^s / log^delta(e + r)
  Iterated,    // r / phi_p(r)
  Saturating,  // r / (1 + r)
  Constant,    // c
  Custom,      // tabulated, linear interpolation, flat outside the table
  Shifted,     // base - mu
  Scaled,      // factor * base
  Dilated,     // base(r / h)
};

// A continuous, bounded-below radial symbol F with cached infimum and hints.
class MultiplierSymbol {
 public:
  static MultiplierSymbol fractional(double s);
  static MultiplierSymbol halfheat();
  static MultiplierSymbol loglog(double s, double delta);
  static MultiplierSymbol iterated(int p);
  static MultiplierSymbol saturating();
  static MultiplierSymbol constant(double c);
  static MultiplierSymbol custom(std::vector<double> r, std::vector<double> values);
  static MultiplierSymbol shifted(const MultiplierSymbol& base, double mu);
  static MultiplierSymbol scaled(const MultiplierSymbol& base, double factor);
  static MultiplierSymbol dilated(const MultiplierSymbol& base, double h);

  double operator()(double r) const;

  SymbolFamily family() const noexcept;
  std::string name() const;

  double inf_value() const noexcept;
  double inf_argmin() const noexcept;
  // Non-decreasing on [0, inf); lets searches stop at their right end.
  bool monotone_tail() const noexcept;
  // s -> F(e^s) is convex, so moment searches may use unimodal search.
  bool log_convex() const noexcept;
  std::optional<double> sup_value() const noexcept;
  std::optional<double> limit_at_infinity() const noexcept;
  // Upper end of the radial range searched by moment computations.
  double r_cap() const noexcept;

  // Base symbol of shifted/scaled/dilated symbols.
  std::optional<MultiplierSymbol> base() const;
  // mu, factor or h for derived families; s for fractional/loglog.
  double parameter() const noexcept;

  struct Node;

 private:
  explicit MultiplierSymbol(std::shared_ptr<const Node> node);
  static MultiplierSymbol finish(std::shared_ptr<Node> node);
  std::shared_ptr<const Node> node_;
};

// g(t) = log(e + t) and phi_p = g * (g o g) * ... * g^{op}.
class IteratedLog {
 public:
  explicit IteratedLog(int p);
  int p() const noexcept { return p_; }
  static double g(double t);
  double phi(double t) const;
  // phi_p'(t) / phi_p(t) in closed form.
  double phi_log_derivative(double t) const;
  // F_p'(t) for F_p(t) = t / phi_p(t), from the closed form above.
  double symbol_derivative(double t) const;

 private:
  int p_;
};

struct InfResult {
  double value;
  double argmin;
  bool reliable;
};

InfResult inf_F(const MultiplierSymbol& F, double r_max, int grid_points);
double alpha_R(const MultiplierSymbol& F, double R, double r_max, int grid_points);
// r_max = max(10 R, 100), 4096 scan points.
double alpha_R(const MultiplierSymbol& F, double R);

}  // namespace thickstab
