#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace msfem {

enum class Orientation { vertical, horizontal };

/// Half-open box of fine cells [i0, i1) x [j0, j1), i along x, j along y.
struct CellBox {
    int i0 = 0, j0 = 0, i1 = 0, j1 = 0;

    int width() const { return i1 - i0; }
    int height() const { return j1 - j0; }
    int count() const { return width() * height(); }
    bool contains(int i, int j) const { return i >= i0 && i < i1 && j >= j0 && j < j1; }
    bool contains(const CellBox& o) const
    {
        return o.i0 >= i0 && o.i1 <= i1 && o.j0 >= j0 && o.j1 <= j1;
    }
    bool operator==(const CellBox&) const = default;
};

/// Fine edge position. Vertical edges sit on x = i*h next to cell row j;
/// horizontal edges sit on y = j*h next to cell column i.
struct FineEdge {
    Orientation orientation;
    int i;
    int j;
};

/// A coarse edge E_i with its fixed unit normal m_i (+x for vertical edges,
/// +y for horizontal ones).
struct CoarseEdge {
    int id = -1;
    Orientation orientation = Orientation::vertical;
    int line = 0;     ///< x = line*H (vertical) or y = line*H (horizontal)
    int segment = 0;  ///< coarse row (vertical) or column (horizontal) along the line
    std::vector<int> fine_edges;  ///< e_1..e_J ordered by increasing y (vertical) or x
    std::array<int, 2> blocks{-1, -1};  ///< left/lower and right/upper block, -1 outside D
    bool boundary = false;

    std::array<double, 2> normal() const
    {
        return orientation == Orientation::vertical ? std::array{1.0, 0.0}
                                                    : std::array{0.0, 1.0};
    }
    int fine_count() const { return static_cast<int>(fine_edges.size()); }
};

/// Nested structured grids on the unit square: n x n fine cells inside N x N
/// coarse blocks. Cells, edges and coarse objects are numbered row-major from
/// the lower-left corner; vertical edges come before horizontal ones.
///
/// Immutable after construction.
class GridHierarchy {
public:
    GridHierarchy(int n, int N);

    int n() const { return n_; }
    int N() const { return N_; }
    int ratio() const { return n_ / N_; }
    double h() const { return 1.0 / n_; }
    double H() const { return 1.0 / N_; }
    double cell_area() const { return h() * h(); }

    // fine cells
    int num_cells() const { return n_ * n_; }
    int cell(int i, int j) const { return j * n_ + i; }
    std::array<int, 2> cell_coords(int c) const { return {c % n_, c / n_}; }
    std::array<double, 2> cell_center(int c) const;

    // fine edges
    int num_vertical_edges() const { return (n_ + 1) * n_; }
    int num_edges() const { return 2 * (n_ + 1) * n_; }
    int vertical_edge(int i, int j) const { return j * (n_ + 1) + i; }
    int horizontal_edge(int i, int j) const { return num_vertical_edges() + j * n_ + i; }
    FineEdge edge(int e) const;
    /// Cells on the negative and positive side of the edge normal, -1 outside D.
    std::array<int, 2> edge_cells(int e) const;
    /// West, east, south, north edges of a cell.
    std::array<int, 4> cell_edges(int c) const;
    bool on_domain_boundary(int e) const;

    // fine vertices, (n+1) x (n+1)
    int num_vertices() const { return (n_ + 1) * (n_ + 1); }
    int vertex(int i, int j) const { return j * (n_ + 1) + i; }

    // coarse blocks
    int num_blocks() const { return N_ * N_; }
    int block(int I, int J) const { return J * N_ + I; }
    int block_of_cell(int c) const;
    CellBox block_box(int K) const;

    // coarse edges
    int num_coarse_edges() const { return static_cast<int>(coarse_edges_.size()); }
    int num_interior_coarse_edges() const { return static_cast<int>(interior_.size()); }
    const std::vector<CoarseEdge>& coarse_edges() const { return coarse_edges_; }
    const CoarseEdge& coarse_edge(int id) const { return coarse_edges_[static_cast<std::size_t>(id)]; }
    /// Ids of interior coarse edges, ascending.
    const std::vector<int>& interior_coarse_edges() const { return interior_; }
    /// Coarse edge containing fine edge e, or -1 when e is inside a block.
    int coarse_edge_of(int e) const { return fine_to_coarse_[static_cast<std::size_t>(e)]; }

    /// omega_i: the one or two blocks sharing the edge.
    CellBox neighborhood(const CoarseEdge& edge) const;
    /// omega_i enlarged by `layers` rings of fine cells and clipped to D.
    CellBox oversampled_neighborhood(const CoarseEdge& edge, int layers) const;
    /// Default oversampling width, ratio/2 fine layers (at least one).
    int default_oversampling_layers() const { return ratio() / 2 > 0 ? ratio() / 2 : 1; }

private:
    int n_;
    int N_;
    std::vector<CoarseEdge> coarse_edges_;
    std::vector<int> interior_;
    std::vector<int> fine_to_coarse_;
};

/// A conforming set of fine cells with local numbering of its cells and
/// edges. Edges with both neighbours inside are interior (unknowns of a
/// local mixed solve); edges with exactly one neighbour inside are boundary
/// edges (prescribed normal flux). Keeps a pointer to the grid, which must
/// outlive it.
class Region {
public:
    Region(const GridHierarchy& grid, std::vector<int> cells);
    Region(const GridHierarchy& grid, const CellBox& box);

    const GridHierarchy& grid() const { return *grid_; }
    const std::vector<int>& cells() const { return cells_; }
    int num_cells() const { return static_cast<int>(cells_.size()); }
    double area() const { return num_cells() * grid_->cell_area(); }
    int local_cell(int global) const;
    bool contains(int global_cell) const { return local_cell(global_cell) >= 0; }

    const std::vector<int>& interior_edges() const { return interior_edges_; }
    const std::vector<int>& boundary_edges() const { return boundary_edges_; }
    /// +1 when the edge's +x/+y direction points out of the region.
    const std::vector<int>& boundary_signs() const { return boundary_signs_; }
    int local_interior_edge(int global) const;
    int local_boundary_edge(int global) const;

    /// Vertices whose four surrounding cells all lie in the region.
    const std::vector<int>& interior_vertices() const { return interior_vertices_; }

    int num_components() const { return num_components_; }
    /// Component label per local cell.
    const std::vector<int>& component_of() const { return component_; }

private:
    void build();

    const GridHierarchy* grid_;
    std::vector<int> cells_;
    std::vector<int> interior_edges_;
    std::vector<int> boundary_edges_;
    std::vector<int> boundary_signs_;
    std::vector<int> interior_vertices_;
    std::vector<int> component_;
    int num_components_ = 0;
};

std::vector<int> box_cells(const GridHierarchy& grid, const CellBox& box);

} // namespace msfem
