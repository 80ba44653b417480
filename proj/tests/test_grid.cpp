#include "doctest.h"

#include <set>

#include "msfem/error.hpp"
#include "msfem/grid.hpp"

using namespace msfem;

TEST_CASE("small hierarchy counts")
{
    const GridHierarchy g(4, 2);
    CHECK(g.num_cells() == 16);
    CHECK(g.num_edges() == 40);
    CHECK(g.num_coarse_edges() == 12);
    CHECK(g.num_interior_coarse_edges() == 4);
    for (const CoarseEdge& e : g.coarse_edges())
        CHECK(e.fine_count() == 2);

    const GridHierarchy big(200, 10);
    for (int id : big.interior_coarse_edges())
        CHECK(big.coarse_edge(id).fine_count() == 20);
    CHECK(big.num_interior_coarse_edges() == 180);
}

TEST_CASE("invalid sizes are rejected")
{
    CHECK_THROWS_AS(GridHierarchy(4, 4), ConfigError);
    CHECK_THROWS_AS(GridHierarchy(10, 4), ConfigError);
    CHECK_THROWS_AS(GridHierarchy(1, 1), ConfigError);
}

TEST_CASE("edge and cell numbering agree")
{
    const GridHierarchy g(6, 3);
    for (int c = 0; c < g.num_cells(); ++c) {
        const auto edges = g.cell_edges(c);
        // west and south edges have c on their positive side
        CHECK(g.edge_cells(edges[0])[1] == c);
        CHECK(g.edge_cells(edges[1])[0] == c);
        CHECK(g.edge_cells(edges[2])[1] == c);
        CHECK(g.edge_cells(edges[3])[0] == c);
    }
    int boundary = 0;
    for (int e = 0; e < g.num_edges(); ++e)
        boundary += g.on_domain_boundary(e);
    CHECK(boundary == 4 * 6);
    CHECK(g.edge_cells(g.vertical_edge(0, 0))[0] == -1);
}

TEST_CASE("coarse edge fine edges are ordered and mapped back")
{
    const GridHierarchy g(8, 2);
    std::set<int> seen;
    for (const CoarseEdge& e : g.coarse_edges()) {
        for (int k = 0; k < e.fine_count(); ++k) {
            const int f = e.fine_edges[static_cast<std::size_t>(k)];
            CHECK(g.coarse_edge_of(f) == e.id);
            CHECK(seen.insert(f).second);
            const FineEdge fe = g.edge(f);
            if (e.orientation == Orientation::vertical)
                CHECK(fe.j == e.segment * g.ratio() + k);
            else
                CHECK(fe.i == e.segment * g.ratio() + k);
        }
        CHECK(e.boundary == (e.blocks[0] < 0 || e.blocks[1] < 0));
    }
    // fine edges strictly inside blocks belong to no coarse edge
    CHECK(g.coarse_edge_of(g.vertical_edge(1, 0)) == -1);
}

TEST_CASE("neighbourhoods")
{
    const GridHierarchy g(4, 2);
    for (const CoarseEdge& e : g.coarse_edges())
        CHECK(g.neighborhood(e).count() == (e.boundary ? 4 : 8));

    const GridHierarchy wide(200, 10);
    for (int id : wide.interior_coarse_edges())
        if (wide.coarse_edge(id).orientation == Orientation::horizontal) {
            CHECK(wide.neighborhood(wide.coarse_edge(id)).count() == 800);
            break;
        }
}

TEST_CASE("oversampled neighbourhoods")
{
    // central interior edge of a grid with room on every side
    const GridHierarchy g(8, 4);
    const CoarseEdge* central = nullptr;
    for (int id : g.interior_coarse_edges()) {
        const CoarseEdge& e = g.coarse_edge(id);
        if (e.orientation == Orientation::vertical && e.line == 2 && e.segment == 1)
            central = &e;
    }
    REQUIRE(central != nullptr);
    const CellBox box = g.oversampled_neighborhood(*central, g.default_oversampling_layers());
    CHECK(box.width() == 6);
    CHECK(box.height() == 4);
    CHECK(box.count() == 24);

    // on a 2x2 coarse grid the enlargement is clipped at the domain
    const GridHierarchy small(4, 2);
    for (int id : small.interior_coarse_edges()) {
        const CoarseEdge& e = small.coarse_edge(id);
        const CellBox over = small.oversampled_neighborhood(e, 1);
        CHECK(over.contains(small.neighborhood(e)));
        CHECK(over.i0 >= 0);
        CHECK(over.j0 >= 0);
        CHECK(over.i1 <= 4);
        CHECK(over.j1 <= 4);
    }
    CHECK_THROWS_AS(small.oversampled_neighborhood(small.coarse_edge(small.interior_coarse_edges()[0]), 0),
                    ConfigError);
}

TEST_CASE("region bookkeeping")
{
    const GridHierarchy g(4, 2);
    const Region r(g, CellBox{0, 0, 2, 2});
    CHECK(r.num_cells() == 4);
    CHECK(r.interior_edges().size() == 4);
    CHECK(r.boundary_edges().size() == 8);
    CHECK(r.interior_vertices().size() == 1);
    CHECK(r.num_components() == 1);
    CHECK(r.area() == doctest::Approx(0.25));

    for (std::size_t k = 0; k < r.boundary_edges().size(); ++k) {
        const int e = r.boundary_edges()[k];
        const auto cells = g.edge_cells(e);
        const bool negative_inside = cells[0] >= 0 && r.contains(cells[0]);
        CHECK(r.boundary_signs()[k] == (negative_inside ? 1 : -1));
    }

    const Region split(g, std::vector<int>{g.cell(0, 0), g.cell(3, 3)});
    CHECK(split.num_components() == 2);
    CHECK(split.interior_edges().empty());
}
