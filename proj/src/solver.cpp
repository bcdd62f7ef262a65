#include "nlbellman/solver.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include <Eigen/SparseLU>

#include "nlbellman/errors.hpp"
#include "nlbellman/nonlocal_eval.hpp"
#include "nlbellman/parallel.hpp"

namespace nlb {

namespace {

constexpr double kInteriorRadius = 1.0;

bool is_interior(const Point& x) { return norm(x) < kInteriorRadius * (1.0 - 1e-12); }

struct RowEntry {
  std::ptrdiff_t col;
  double value;
};

struct AssembledRow {
  std::vector<RowEntry> entries;
  double constant = 0.0;
};

using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

ColMatrix policy_matrix(const Stencils& st, const std::vector<int>& policy) {
  std::vector<Eigen::Triplet<double>> trips;
  for (std::size_t i = 0; i < st.unknown_count(); ++i) {
    const auto& A = st.matrices[policy[i]];
    for (SparseRows::InnerIterator it(A, static_cast<Eigen::Index>(i)); it; ++it)
      trips.emplace_back(static_cast<int>(i), static_cast<int>(it.col()), it.value());
  }
  ColMatrix M(st.unknown_count(), st.unknown_count());
  M.setFromTriplets(trips.begin(), trips.end());
  M.makeCompressed();
  return M;
}

Eigen::VectorXd policy_constant(const Stencils& st, const std::vector<int>& policy) {
  Eigen::VectorXd c(st.unknown_count());
  for (std::size_t i = 0; i < st.unknown_count(); ++i) c[i] = st.constants[policy[i]][i];
  return c;
}

std::vector<int> argmin_policy(const std::vector<Eigen::VectorXd>& F, double* sup) {
  const std::size_t N = F.front().size();
  std::vector<int> policy(N, 0);
  double worst = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    double best = F[0][i];
    for (std::size_t a = 1; a < F.size(); ++a)
      if (F[a][i] < best) {
        best = F[a][i];
        policy[i] = static_cast<int>(a);
      }
    worst = std::max(worst, std::abs(best));
  }
  if (sup) *sup = worst;
  return policy;
}

}  // namespace

Eigen::VectorXd Stencils::restrict(const ScalarField& u) const {
  if (!(u.grid() == grid)) throw ValidationError("u", "field grid differs from the stencil grid");
  Eigen::VectorXd U(unknown_count());
  for (std::size_t i = 0; i < unknown_count(); ++i) U[i] = u.values()[unknowns[i]];
  return U;
}

ScalarField Stencils::extend(const Eigen::VectorXd& U) const {
  std::vector<double> v(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k)
    v[k] = unknown_of[k] >= 0 ? U[unknown_of[k]] : exterior(grid.coordinate(k));
  return ScalarField(grid, std::move(v), exterior).with_exterior_region(kInteriorRadius);
}

std::vector<Eigen::VectorXd> Stencils::apply(const Eigen::VectorXd& U) const {
  std::vector<Eigen::VectorXd> F;
  for (std::size_t a = 0; a < kernel_count(); ++a) F.push_back(matrices[a] * U + constants[a]);
  return F;
}

Stencils discretize(const BellmanProblem& problem, const QuadratureScheme& scheme) {
  problem.validate();
  const Grid& grid = problem.grid;
  const double h = grid.h();
  scheme.validate_for_grid(h);
  if (scheme.interpolation_order > 1)
    throw MonotonicityError("cubic interpolation weights are not monotone; use order 0 or 1");
  auto layout = std::make_shared<QuadratureLayout>(scheme, problem.dimension());
  const QuadratureLayout& L = *layout;
  const int order = scheme.interpolation_order;
  const ExteriorClosure& g = problem.exterior;

  Stencils st;
  st.grid = grid;
  st.exterior = g;
  st.unknown_of.assign(grid.size(), -1);
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (is_interior(grid.coordinate(k))) {
      st.unknown_of[k] = static_cast<std::ptrdiff_t>(st.unknowns.size());
      st.unknowns.push_back(k);
    }
  const std::size_t N = st.unknowns.size();
  std::vector<double> fixed(grid.size(), 0.0);
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (st.unknown_of[k] < 0) fixed[k] = g(grid.coordinate(k));

  for (std::size_t a = 0; a < problem.kernels.size(); ++a) {
    const KernelTable T = tabulate(problem.kernels[a], L);
    const double b = problem.offsets[a];
    std::vector<AssembledRow> rows(N);
    constexpr std::size_t chunk = 32;
    parallel_for((N + chunk - 1) / chunk, [&](std::size_t c) {
      std::vector<double> acc(grid.size(), 0.0);
      std::vector<std::size_t> touched;
      auto add = [&](std::size_t node, double w) {
        if (acc[node] == 0.0) touched.push_back(node);
        acc[node] += w;
      };
      for (std::size_t i = c * chunk; i < std::min(N, (c + 1) * chunk); ++i) {
        const std::size_t node = st.unknowns[i];
        const Point x = grid.coordinate(node);
        double constant = b;
        for (std::size_t k = 0; k < L.direction_count(); ++k) {
          const double coef = L.direction_weight(k) * T.core[k] / (h * h);
          for (const auto& tap : L.direction_stencil(k)) {
            const Point z = x + h * Point{double(tap.di), double(tap.dj)};
            add(*grid.node_at(z), coef * tap.weight);
          }
        }
        for (std::size_t at = 0; at < L.atom_count(); ++at) {
          const double w = L.atom_weight(at) * T.ring[at];
          const Point y = L.atom_offset(at);
          for (const Point& z : {x + y, x - y}) {
            if (grid.in_box(z) && norm(z) < kInteriorRadius) {
              grid.interpolation_weights(z, order, [&](std::size_t k, double iw) { add(k, w * iw); });
            } else {
              constant += w * g(z);
            }
          }
          add(node, -2.0 * w);
        }
        add(node, -2.0 * T.tail);
        constant += 2.0 * T.tail * g.offset();

        AssembledRow& row = rows[i];
        const double diag = acc[node];
        std::sort(touched.begin(), touched.end());
        touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
        for (std::size_t k : touched) {
          const double v = acc[k];
          acc[k] = 0.0;
          if (k == node) continue;
          if (v < -1e-12 * std::abs(diag))
            throw MonotonicityError("negative off-diagonal weight " + std::to_string(v) +
                                    " at node " + std::to_string(node));
          if (st.unknown_of[k] >= 0) {
            row.entries.push_back({st.unknown_of[k], v});
          } else {
            constant += v * fixed[k];
          }
        }
        row.entries.push_back({static_cast<std::ptrdiff_t>(i), diag});
        row.constant = constant;
        touched.clear();
      }
    });

    std::vector<Eigen::Triplet<double>> trips;
    Eigen::VectorXd cvec(N);
    for (std::size_t i = 0; i < N; ++i) {
      for (const auto& e : rows[i].entries)
        trips.emplace_back(static_cast<int>(i), static_cast<int>(e.col), e.value);
      cvec[i] = rows[i].constant;
    }
    SparseRows A(N, N);
    A.setFromTriplets(trips.begin(), trips.end());
    A.makeCompressed();
    st.matrices.push_back(std::move(A));
    st.constants.push_back(std::move(cvec));
  }
  return st;
}

ControlField policy_improvement(const Stencils& stencils, const ScalarField& u) {
  return {argmin_policy(stencils.apply(stencils.restrict(u)), nullptr)};
}

Solution solve_dirichlet(const BellmanProblem& problem, const QuadratureScheme& scheme, double tol,
                         int max_iter) {
  return solve_dirichlet(discretize(problem, scheme), tol, max_iter);
}

Solution solve_dirichlet(const Stencils& st, double tol, int max_iter) {
  if (!(tol > 0.0)) throw ValidationError("tol", "must be positive");
  if (max_iter < 1) throw ValidationError("max_iter", "must be positive");
  const std::size_t N = st.unknown_count();
  std::vector<int> policy(N, 0);
  std::vector<double> history;
  Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>> lu;

  for (int it = 1; it <= max_iter; ++it) {
    lu.compute(policy_matrix(st, policy));
    if (lu.info() != Eigen::Success)
      throw ConfigurationError("linear system of the frozen policy is singular");
    const Eigen::VectorXd U = lu.solve(-policy_constant(st, policy));
    if (lu.info() != Eigen::Success || !U.allFinite())
      throw ConfigurationError("linear solve failed");

    double sup = 0.0;
    std::vector<int> next = argmin_policy(st.apply(U), &sup);
    history.push_back(sup);
    const bool stationary = next == policy;
    if (sup <= tol || stationary) {
      if (sup > tol)
        throw NonconvergenceError("policy is stationary but the residual exceeds tol", history);
      Solution s{st.extend(U), sup, it, {next}, history, 0.0};
      const Eigen::VectorXd w = lu.solve(Eigen::VectorXd::Constant(N, -1.0));
      s.max_principle_constant = N ? w.maxCoeff() : 0.0;
      return s;
    }
    policy = std::move(next);
  }
  throw NonconvergenceError("Howard iteration exceeded " + std::to_string(max_iter) + " iterations",
                            history);
}

RegularizedSequence solve_regularized_sequence(const BellmanProblem& problem,
                                               const QuadratureScheme& scheme, double tol,
                                               const std::vector<double>& eps_list, int max_iter) {
  problem.validate();
  if (eps_list.empty()) throw ValidationError("eps_list", "must not be empty");
  for (std::size_t k = 1; k < eps_list.size(); ++k)
    if (!(eps_list[k] < eps_list[k - 1])) throw ValidationError("eps_list", "must be decreasing");
  if (eps_list.back() < 2.0 * problem.grid.h() * (1.0 - 1e-12))
    throw ValidationError("eps_list", "last entry must be at least 2h");

  const double lambda = problem.family_bounds().lambda;
  RegularizedSequence seq;
  for (double eps : eps_list) {
    std::vector<Kernel> ks;
    for (const auto& K : problem.kernels) ks.push_back(regularize_kernel(K, eps, lambda));
    seq.steps.push_back({eps, solve_dirichlet(problem.with_kernels(ks), scheme, tol, max_iter)});
  }
  const auto distance = [](const ScalarField& u, const ScalarField& v) {
    double d = 0.0;
    for (std::size_t k = 0; k < u.values().size(); ++k)
      d = std::max(d, std::abs(u.values()[k] - v.values()[k]));
    return d;
  };
  const ScalarField& last = seq.steps.back().solution.field;
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < seq.steps.size(); ++k) {
    auto& s = seq.steps[k];
    s.sup_distance_to_limit = distance(s.solution.field, last);
    if (k + 1 < seq.steps.size()) {
      s.successive_distance = distance(s.solution.field, seq.steps[k + 1].solution.field);
      if (s.successive_distance > 0.0) {
        lx.push_back(std::log(s.epsilon));
        ly.push_back(std::log(s.successive_distance));
      }
    }
  }
  seq.rate = std::numeric_limits<double>::quiet_NaN();
  if (lx.size() >= 2) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i], my += ly[i];
    mx /= lx.size();
    my /= ly.size();
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxx += (lx[i] - mx) * (lx[i] - mx);
      sxy += (lx[i] - mx) * (ly[i] - my);
    }
    seq.rate = sxy / sxx;
  }
  return seq;
}

ScalarField residual(const BellmanProblem& problem, const ScalarField& u,
                     const QuadratureScheme& scheme) {
  problem.validate();
  if (!(u.grid() == problem.grid)) throw ValidationError("u", "field grid differs from the problem grid");
  auto layout = std::make_shared<QuadratureLayout>(scheme, problem.dimension());
  std::vector<LinearOperator> ops;
  for (const auto& K : problem.kernels) ops.emplace_back(K, layout);
  const Grid& grid = problem.grid;
  std::vector<double> r(grid.size(), 0.0);
  parallel_for(grid.size(), [&](std::size_t k) {
    const Point x = grid.coordinate(k);
    if (!is_interior(x)) return;
    const PointSamples s = gather_samples(u, x, *layout);
    double best = 0.0;
    for (std::size_t a = 0; a < ops.size(); ++a) {
      const double v = ops[a](s).value + problem.offsets[a];
      if (a == 0 || v < best) best = v;
    }
    r[k] = best;
  });
  return ScalarField(grid, std::move(r), ExteriorClosure());
}

double residual_sup(const BellmanProblem& problem, const ScalarField& u,
                    const QuadratureScheme& scheme) {
  const ScalarField r = residual(problem, u, scheme);
  double s = 0.0;
  for (double v : r.values()) s = std::max(s, std::abs(v));
  return s;
}

}  // namespace nlb
