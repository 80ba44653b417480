#include "msfem/grid.hpp"

#include <algorithm>
#include <string>

#include "msfem/error.hpp"

namespace msfem {

GridHierarchy::GridHierarchy(int n, int N) : n_(n), N_(N)
{
    if (n < 2 || N < 2)
        throw ConfigError("grid sizes must be at least 2 (n=" + std::to_string(n) +
                          ", N=" + std::to_string(N) + ")");
    if (n % N != 0)
        throw ConfigError("fine size n=" + std::to_string(n) +
                          " is not divisible by coarse size N=" + std::to_string(N));
    if (n / N < 2)
        throw ConfigError("fine cells per coarse block side n/N must be at least 2 (n=" +
                          std::to_string(n) + ", N=" + std::to_string(N) + ")");

    const int r = ratio();
    fine_to_coarse_.assign(static_cast<std::size_t>(num_edges()), -1);
    coarse_edges_.reserve(static_cast<std::size_t>(2 * N * (N + 1)));

    for (int J = 0; J < N; ++J) {
        for (int I = 0; I <= N; ++I) {
            CoarseEdge e;
            e.id = static_cast<int>(coarse_edges_.size());
            e.orientation = Orientation::vertical;
            e.line = I;
            e.segment = J;
            for (int k = 0; k < r; ++k)
                e.fine_edges.push_back(vertical_edge(I * r, J * r + k));
            e.blocks = {I > 0 ? block(I - 1, J) : -1, I < N ? block(I, J) : -1};
            e.boundary = (I == 0 || I == N);
            coarse_edges_.push_back(std::move(e));
        }
    }
    for (int J = 0; J <= N; ++J) {
        for (int I = 0; I < N; ++I) {
            CoarseEdge e;
            e.id = static_cast<int>(coarse_edges_.size());
            e.orientation = Orientation::horizontal;
            e.line = J;
            e.segment = I;
            for (int k = 0; k < r; ++k)
                e.fine_edges.push_back(horizontal_edge(I * r + k, J * r));
            e.blocks = {J > 0 ? block(I, J - 1) : -1, J < N ? block(I, J) : -1};
            e.boundary = (J == 0 || J == N);
            coarse_edges_.push_back(std::move(e));
        }
    }

    for (const auto& e : coarse_edges_) {
        for (int fe : e.fine_edges)
            fine_to_coarse_[static_cast<std::size_t>(fe)] = e.id;
        if (!e.boundary)
            interior_.push_back(e.id);
    }
}

std::array<double, 2> GridHierarchy::cell_center(int c) const
{
    const auto [i, j] = cell_coords(c);
    return {(i + 0.5) * h(), (j + 0.5) * h()};
}

FineEdge GridHierarchy::edge(int e) const
{
    if (e < num_vertical_edges())
        return {Orientation::vertical, e % (n_ + 1), e / (n_ + 1)};
    const int k = e - num_vertical_edges();
    return {Orientation::horizontal, k % n_, k / n_};
}

std::array<int, 2> GridHierarchy::edge_cells(int e) const
{
    const FineEdge fe = edge(e);
    if (fe.orientation == Orientation::vertical)
        return {fe.i > 0 ? cell(fe.i - 1, fe.j) : -1, fe.i < n_ ? cell(fe.i, fe.j) : -1};
    return {fe.j > 0 ? cell(fe.i, fe.j - 1) : -1, fe.j < n_ ? cell(fe.i, fe.j) : -1};
}

std::array<int, 4> GridHierarchy::cell_edges(int c) const
{
    const auto [i, j] = cell_coords(c);
    return {vertical_edge(i, j), vertical_edge(i + 1, j), horizontal_edge(i, j),
            horizontal_edge(i, j + 1)};
}

bool GridHierarchy::on_domain_boundary(int e) const
{
    const auto cells = edge_cells(e);
    return cells[0] < 0 || cells[1] < 0;
}

int GridHierarchy::block_of_cell(int c) const
{
    const auto [i, j] = cell_coords(c);
    return block(i / ratio(), j / ratio());
}

CellBox GridHierarchy::block_box(int K) const
{
    const int r = ratio();
    const int I = K % N_;
    const int J = K / N_;
    return {I * r, J * r, (I + 1) * r, (J + 1) * r};
}

CellBox GridHierarchy::neighborhood(const CoarseEdge& edge) const
{
    CellBox box{n_, n_, 0, 0};
    for (int K : edge.blocks) {
        if (K < 0)
            continue;
        const CellBox b = block_box(K);
        box.i0 = std::min(box.i0, b.i0);
        box.j0 = std::min(box.j0, b.j0);
        box.i1 = std::max(box.i1, b.i1);
        box.j1 = std::max(box.j1, b.j1);
    }
    return box;
}

CellBox GridHierarchy::oversampled_neighborhood(const CoarseEdge& edge, int layers) const
{
    if (layers < 1)
        throw ConfigError("oversampling layers must be at least 1 (got " +
                          std::to_string(layers) + ")");
    CellBox box = neighborhood(edge);
    box.i0 = std::max(0, box.i0 - layers);
    box.j0 = std::max(0, box.j0 - layers);
    box.i1 = std::min(n_, box.i1 + layers);
    box.j1 = std::min(n_, box.j1 + layers);
    return box;
}

std::vector<int> box_cells(const GridHierarchy& grid, const CellBox& box)
{
    std::vector<int> cells;
    cells.reserve(static_cast<std::size_t>(box.count()));
    for (int j = box.j0; j < box.j1; ++j)
        for (int i = box.i0; i < box.i1; ++i)
            cells.push_back(grid.cell(i, j));
    return cells;
}

Region::Region(const GridHierarchy& grid, std::vector<int> cells)
    : grid_(&grid), cells_(std::move(cells))
{
    std::sort(cells_.begin(), cells_.end());
    cells_.erase(std::unique(cells_.begin(), cells_.end()), cells_.end());
    if (cells_.empty())
        throw ConfigError("region has no cells");
    if (cells_.front() < 0 || cells_.back() >= grid.num_cells())
        throw ConfigError("region references a cell outside the grid");
    build();
}

Region::Region(const GridHierarchy& grid, const CellBox& box)
    : Region(grid, box_cells(grid, box))
{
}

int Region::local_cell(int global) const
{
    auto it = std::lower_bound(cells_.begin(), cells_.end(), global);
    if (it == cells_.end() || *it != global)
        return -1;
    return static_cast<int>(it - cells_.begin());
}

int Region::local_interior_edge(int global) const
{
    auto it = std::lower_bound(interior_edges_.begin(), interior_edges_.end(), global);
    if (it == interior_edges_.end() || *it != global)
        return -1;
    return static_cast<int>(it - interior_edges_.begin());
}

int Region::local_boundary_edge(int global) const
{
    auto it = std::lower_bound(boundary_edges_.begin(), boundary_edges_.end(), global);
    if (it == boundary_edges_.end() || *it != global)
        return -1;
    return static_cast<int>(it - boundary_edges_.begin());
}

void Region::build()
{
    const GridHierarchy& g = *grid_;

    std::vector<int> edges;
    edges.reserve(cells_.size() * 4);
    for (int c : cells_)
        for (int e : g.cell_edges(c))
            edges.push_back(e);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    for (int e : edges) {
        const auto side = g.edge_cells(e);
        const bool lo = side[0] >= 0 && contains(side[0]);
        const bool hi = side[1] >= 0 && contains(side[1]);
        if (lo && hi) {
            interior_edges_.push_back(e);
        } else {
            boundary_edges_.push_back(e);
            boundary_signs_.push_back(lo ? +1 : -1);
        }
    }

    const int n = g.n();
    for (int j = 1; j < n; ++j) {
        for (int i = 1; i < n; ++i) {
            if (contains(g.cell(i - 1, j - 1)) && contains(g.cell(i, j - 1)) &&
                contains(g.cell(i - 1, j)) && contains(g.cell(i, j)))
                interior_vertices_.push_back(g.vertex(i, j));
        }
    }

    // connected components through interior edges
    component_.assign(cells_.size(), -1);
    std::vector<int> stack;
    for (std::size_t seed = 0; seed < cells_.size(); ++seed) {
        if (component_[seed] >= 0)
            continue;
        component_[seed] = num_components_;
        stack.push_back(static_cast<int>(seed));
        while (!stack.empty()) {
            const int lc = stack.back();
            stack.pop_back();
            for (int e : g.cell_edges(cells_[static_cast<std::size_t>(lc)])) {
                if (local_interior_edge(e) < 0)
                    continue;
                for (int nb : g.edge_cells(e)) {
                    const int ln = local_cell(nb);
                    if (ln >= 0 && component_[static_cast<std::size_t>(ln)] < 0) {
                        component_[static_cast<std::size_t>(ln)] = num_components_;
                        stack.push_back(ln);
                    }
                }
            }
        }
        ++num_components_;
    }
}

} // namespace msfem
