#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>

#include "sulab/error.hpp"
#include "sulab/vecops.hpp"

namespace sulab {

using Mat3 = std::array<std::array<double, 3>, 3>;

// Embedded target surface N in R^3. Both concrete targets are level sets,
// so the tangent projector is I - n n^T with n the unit normal.
class EmbeddedManifold {
 public:
  enum class Kind { UnitSphere, Ellipsoid };

  virtual ~EmbeddedManifold() = default;

  Kind kind() const { return kind_; }
  int ambient_dim() const { return 3; }
  double proj_tol() const { return proj_tol_; }
  std::optional<double> known_min_bubble_energy() const { return bubble_energy_; }
  void set_known_min_bubble_energy(double e) { bubble_energy_ = e; }

  // Nearest point on N. Throws PointOutsideTubularNeighborhood.
  virtual Vec3 project(const Vec3& p) const = 0;

  // Outward unit normal at p (p assumed on N).
  virtual Vec3 unit_normal(const Vec3& p) const = 0;

  // Second fundamental form A(p)(X,Y): normal-valued, bilinear, symmetric.
  // X,Y are tangent-projected first. Convention fixed by the sphere:
  // A(p)(X,Y) = -<X,Y> p.
  virtual Vec3 sff(const Vec3& p, const Vec3& X, const Vec3& Y) const = 0;

  // Geodesic exponential: gamma(1) with gamma''=A(gamma)(gamma',gamma'),
  // gamma(0)=p, gamma'(0)=v.
  virtual Vec3 exp(const Vec3& p, const Vec3& v) const = 0;

  Vec3 tangent_project(const Vec3& p, const Vec3& v) const {
    Vec3 n = unit_normal(p);
    return v - dot(v, n) * n;
  }

  Mat3 tangent_projector(const Vec3& p) const {
    Vec3 n = unit_normal(p);
    Mat3 P;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        P[i][j] = (i == j ? 1.0 : 0.0) - n[i] * n[j];
    return P;
  }

  // Max distance from N tolerated by constraint checks before reprojection.
  double distance_to(const Vec3& p) const { return dist(p, project(p)); }

 protected:
  EmbeddedManifold(Kind kind, double proj_tol) : kind_(kind), proj_tol_(proj_tol) {}

  Kind kind_;
  double proj_tol_;
  std::optional<double> bubble_energy_;
};

class UnitSphere final : public EmbeddedManifold {
 public:
  explicit UnitSphere(double proj_tol = 1e-10)
      : EmbeddedManifold(Kind::UnitSphere, proj_tol) {}

  Vec3 project(const Vec3& p) const override;
  Vec3 unit_normal(const Vec3& p) const override { return p; }
  Vec3 sff(const Vec3& p, const Vec3& X, const Vec3& Y) const override;
  Vec3 exp(const Vec3& p, const Vec3& v) const override;
};

class Ellipsoid final : public EmbeddedManifold {
 public:
  explicit Ellipsoid(const Vec3& semi_axes, double proj_tol = 1e-10);

  const Vec3& semi_axes() const { return axes_; }

  Vec3 project(const Vec3& p) const override;
  Vec3 unit_normal(const Vec3& p) const override;
  Vec3 sff(const Vec3& p, const Vec3& X, const Vec3& Y) const override;
  Vec3 exp(const Vec3& p, const Vec3& v) const override;

 private:
  Vec3 axes_;
  Vec3 m_;  // 1/a_i^2
};

std::unique_ptr<EmbeddedManifold> make_manifold(const std::string& kind,
                                                const Vec3& axes,
                                                double proj_tol);

}  // namespace sulab
