#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>
#include <vector>

#include "eqot/error.hpp"
#include "eqot/transport.hpp"

namespace eqot {

namespace {

struct Cell {
  Index row;
  Index col;
};

// Basic solution of an m x n transportation problem with strictly positive
// supplies and demands. The basis is a spanning tree on m + n nodes (rows
// first, then columns) with exactly m + n - 1 cells, some possibly at zero.
class TransportationSimplex {
 public:
  TransportationSimplex(Matrix cost, Vector supply, Vector demand)
      : cost_(std::move(cost)),
        supply_(std::move(supply)),
        demand_(std::move(demand)),
        m_(static_cast<Index>(supply_.size())),
        n_(static_cast<Index>(demand_.size())),
        flow_(Matrix::Zero(m_, n_)),
        basic_(m_ * n_, false) {
    const double scale = std::max(1.0, cost_.cwiseAbs().maxCoeff());
    tol_ = 1e-12 * scale;
  }

  void solve() {
    north_west_corner();
    const std::size_t max_pivots = 200 * (m_ + n_) * (m_ + n_) + 1000;
    for (;;) {
      compute_potentials();
      const auto entering = find_entering();
      if (!entering) return;
      pivot(*entering);
      if (++pivots_ > max_pivots)
        throw Error(ErrorCode::SolverFailure,
                    "transportation simplex exceeded its pivot limit");
    }
  }

  const Matrix& flow() const { return flow_; }
  const Vector& u() const { return u_; }
  const Vector& v() const { return v_; }
  std::size_t pivots() const { return pivots_; }

 private:
  std::size_t cell_id(const Cell& c) const { return c.row * n_ + c.col; }

  void add_basic(Cell c, double x) {
    flow_(c.row, c.col) = x;
    basic_[cell_id(c)] = true;
    basis_.push_back(c);
  }

  void north_west_corner() {
    Vector rs = supply_, cs = demand_;
    Index i = 0, j = 0;
    for (;;) {
      const double x = std::min(rs(i), cs(j));
      add_basic({i, j}, x);
      rs(i) -= x;
      cs(j) -= x;
      if (i == m_ - 1 && j == n_ - 1) break;
      if (i == m_ - 1) {
        ++j;
      } else if (j == n_ - 1) {
        ++i;
      } else if (rs(i) <= cs(j)) {
        ++i;
      } else {
        ++j;
      }
    }
    // The last cell absorbs the rounding residue of unequal totals.
    const Cell last = basis_.back();
    flow_(last.row, last.col) = std::max(0.0, flow_(last.row, last.col));
  }

  // u_i + v_j = c_ij on the basis tree, rooted at u_0 = 0.
  void compute_potentials() {
    const Index nodes = m_ + n_;
    std::vector<std::vector<Index>> adj(nodes);
    for (std::size_t k = 0; k < basis_.size(); ++k) {
      adj[basis_[k].row].push_back(k);
      adj[m_ + basis_[k].col].push_back(k);
    }
    u_ = Vector::Zero(m_);
    v_ = Vector::Zero(n_);
    std::vector<bool> done(nodes, false);
    std::deque<Index> queue{0};
    done[0] = true;
    while (!queue.empty()) {
      const Index node = queue.front();
      queue.pop_front();
      for (std::size_t k : adj[node]) {
        const Cell& c = basis_[k];
        const Index other = node < m_ ? m_ + c.col : c.row;
        if (done[other]) continue;
        if (node < m_)
          v_(c.col) = cost_(c.row, c.col) - u_(c.row);
        else
          u_(c.row) = cost_(c.row, c.col) - v_(c.col);
        done[other] = true;
        queue.push_back(other);
      }
    }
  }

  std::optional<Cell> find_entering() const {
    for (Index i = 0; i < m_; ++i)
      for (Index j = 0; j < n_; ++j) {
        if (basic_[i * n_ + j]) continue;
        if (cost_(i, j) - u_(i) - v_(j) < -tol_) return Cell{i, j};
      }
    return std::nullopt;
  }

  // Tree path from row node of `enter` to its column node, as basis indices.
  std::vector<std::size_t> tree_path(const Cell& enter) const {
    const Index nodes = m_ + n_;
    std::vector<std::vector<std::size_t>> adj(nodes);
    for (std::size_t k = 0; k < basis_.size(); ++k) {
      adj[basis_[k].row].push_back(k);
      adj[m_ + basis_[k].col].push_back(k);
    }
    constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> via(nodes, kNone);
    std::vector<bool> seen(nodes, false);
    const Index start = enter.row, target = m_ + enter.col;
    std::deque<Index> queue{start};
    seen[start] = true;
    while (!queue.empty() && !seen[target]) {
      const Index node = queue.front();
      queue.pop_front();
      for (std::size_t k : adj[node]) {
        const Cell& c = basis_[k];
        const Index other = node < m_ ? m_ + c.col : c.row;
        if (seen[other]) continue;
        seen[other] = true;
        via[other] = k;
        queue.push_back(other);
      }
    }
    if (!seen[target])
      throw Error(ErrorCode::SolverFailure, "basis is not a spanning tree");
    std::vector<std::size_t> path;
    for (Index node = target; node != start;) {
      const std::size_t k = via[node];
      path.push_back(k);
      const Cell& c = basis_[k];
      node = node < m_ ? m_ + c.col : c.row;
    }
    std::reverse(path.begin(), path.end());
    return path;
  }

  void pivot(const Cell& enter) {
    const auto path = tree_path(enter);
    // Cells along the path alternate -, +, -, ... starting next to the row.
    std::size_t leave = path.front();
    double theta = std::numeric_limits<double>::infinity();
    for (std::size_t step = 0; step < path.size(); step += 2) {
      const Cell& c = basis_[path[step]];
      const double x = flow_(c.row, c.col);
      if (x < theta ||
          (x == theta && cell_id(c) < cell_id(basis_[leave]))) {
        theta = x;
        leave = path[step];
      }
    }
    for (std::size_t step = 0; step < path.size(); ++step) {
      const Cell& c = basis_[path[step]];
      double& x = flow_(c.row, c.col);
      x += (step % 2 == 0) ? -theta : theta;
      if (x < 0.0) x = 0.0;
    }
    const Cell out = basis_[leave];
    flow_(out.row, out.col) = 0.0;
    basic_[cell_id(out)] = false;
    basis_[leave] = enter;
    basic_[cell_id(enter)] = true;
    flow_(enter.row, enter.col) = theta;
  }

  Matrix cost_;
  Vector supply_;
  Vector demand_;
  Index m_;
  Index n_;
  Matrix flow_;
  std::vector<bool> basic_;
  std::vector<Cell> basis_;
  Vector u_;
  Vector v_;
  double tol_ = 0.0;
  std::size_t pivots_ = 0;
};

}  // namespace

TransportSolution solve_transportation(const Matrix& cost, const Vector& supply,
                                       const Vector& demand) {
  const Index m = static_cast<Index>(supply.size());
  const Index n = static_cast<Index>(demand.size());
  if (static_cast<Index>(cost.rows()) != m ||
      static_cast<Index>(cost.cols()) != n)
    throw Error(ErrorCode::DimensionMismatch,
                "cost table shape does not match marginals");
  if (m == 0 || n == 0)
    throw Error(ErrorCode::DimensionMismatch, "empty marginals");
  if (!cost.allFinite())
    throw Error(ErrorCode::Validation, "cost table must be finite");
  if ((supply.array() < 0.0).any() || (demand.array() < 0.0).any())
    throw Error(ErrorCode::Validation, "marginals must be nonnegative");
  const double total_supply = supply.sum(), total_demand = demand.sum();
  if (!(total_supply > 0.0) ||
      std::abs(total_supply - total_demand) >
          1e-12 * std::max(1.0, total_supply))
    throw Error(ErrorCode::Validation, "marginals must have equal positive mass");

  std::vector<Index> rows, cols;
  for (Index i = 0; i < m; ++i)
    if (supply(i) > 0.0) rows.push_back(i);
  for (Index j = 0; j < n; ++j)
    if (demand(j) > 0.0) cols.push_back(j);

  Matrix sub_cost(rows.size(), cols.size());
  Vector sub_supply(rows.size()), sub_demand(cols.size());
  for (Index a = 0; a < rows.size(); ++a) {
    sub_supply(a) = supply(rows[a]);
    for (Index b = 0; b < cols.size(); ++b)
      sub_cost(a, b) = cost(rows[a], cols[b]);
  }
  for (Index b = 0; b < cols.size(); ++b) sub_demand(b) = demand(cols[b]);

  TransportationSimplex simplex(sub_cost, sub_supply, sub_demand);
  simplex.solve();

  TransportSolution out;
  out.plan = Matrix::Zero(m, n);
  out.u = Vector::Constant(m, std::numeric_limits<double>::quiet_NaN());
  out.v = Vector::Constant(n, std::numeric_limits<double>::quiet_NaN());
  for (Index a = 0; a < rows.size(); ++a) {
    out.u(rows[a]) = simplex.u()(a);
    for (Index b = 0; b < cols.size(); ++b)
      out.plan(rows[a], cols[b]) = simplex.flow()(a, b);
  }
  for (Index b = 0; b < cols.size(); ++b) out.v(cols[b]) = simplex.v()(b);

  // c-transforms extend the duals to the removed rows and columns.
  std::vector<bool> active_row(m, false);
  for (Index i : rows) active_row[i] = true;
  std::vector<bool> active_col(n, false);
  for (Index j : cols) active_col[j] = true;
  for (Index j = 0; j < n; ++j) {
    if (active_col[j]) continue;
    double best = std::numeric_limits<double>::infinity();
    for (Index i : rows) best = std::min(best, cost(i, j) - out.u(i));
    out.v(j) = best;
  }
  for (Index i = 0; i < m; ++i) {
    if (active_row[i]) continue;
    double best = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < n; ++j) best = std::min(best, cost(i, j) - out.v(j));
    out.u(i) = best;
  }

  double objective = 0.0;
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) objective += out.plan(i, j) * cost(i, j);
  out.objective = objective;
  out.pivots = simplex.pivots();
  return out;
}

}  // namespace eqot
