#pragma once

#include "mpa/dsep.hpp"
#include "mpa/graph.hpp"
#include "mpa/transforms.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mpa {

/// One structure from the violation catalog. Every entry is built on the same
/// skeleton (X -> Z, X -> Y, Z -> Y, C -> Z, C -> Y; X partially observed with
/// indicator R, C fully observed) plus the listed extra arrows.
struct CatalogEntry {
    std::string id;
    // "msita": Z-to-R x R-to-Y grid; "cit_cio": subgroup violations;
    // "twin": further violations where Z or Y causes R.
    std::string family;
    // "A" (confounder when missing) / "B" (collider at R) for cit_cio rows.
    std::string group;
    std::string description;
    std::string dsl;
    PatternModification mod;  // for the X-missing pattern
    Assumption violated;
    // Latent whose measurement removes the violation, when one exists.
    std::optional<std::string> fix;
    // True for structures no extra conditioning can repair.
    bool no_fix = false;

    CausalGraph graph() const { return parse_graph(dsl); }
};

const std::vector<CatalogEntry>& violation_catalog();

/// Z-to-R and R-to-Y building blocks of the msita grid, each safe on its own.
struct CatalogPiece {
    std::string id;
    std::vector<Edge> edges;
};
const std::vector<CatalogPiece>& z_to_r_pieces();
const std::vector<CatalogPiece>& r_to_y_pieces();

/// Skeleton plus `extra` edges rendered as DSL with roles.
std::string catalog_dsl(const std::vector<Edge>& extra);

}  // namespace mpa
