#include "mpa/catalog.hpp"

#include <set>

namespace mpa {

namespace {

const std::vector<Edge> kSkeleton{{"X", "Z"}, {"X", "Y"}, {"Z", "Y"}, {"C", "Z"}, {"C", "Y"}};

PatternModification missing_x(std::vector<Edge> removed) {
    return PatternModification{{{"X", false}}, std::move(removed)};
}

}  // namespace

std::string catalog_dsl(const std::vector<Edge>& extra) {
    std::set<Edge> edges(kSkeleton.begin(), kSkeleton.end());
    edges.insert(extra.begin(), extra.end());
    std::set<std::string> latents;
    bool has_r = false;
    for (const auto& [a, b] : edges) {
        for (const auto* n : {&a, &b}) {
            if (n->rfind("U_", 0) == 0) latents.insert(*n);
            if (*n == "R") has_r = true;
        }
    }
    std::string out = "dag {\n";
    if (!has_r) out += "  R\n";
    for (const auto& [a, b] : edges) out += "  " + a + " -> " + b + "\n";
    out += "}\nroles {\n  treatment Z\n  outcome Y\n  confounder X partial\n  missing R of X\n"
           "  confounder C full\n";
    for (const auto& u : latents) out += "  latent " + u + "\n";
    out += "}\n";
    return out;
}

const std::vector<CatalogPiece>& z_to_r_pieces() {
    static const std::vector<CatalogPiece> pieces{
        {"zr_direct", {{"Z", "R"}}},
        {"zr_common", {{"U_Z", "Z"}, {"U_Z", "R"}}},
        {"zr_via_x", {{"U_XZ", "X"}, {"U_XZ", "Z"}, {"U_X", "X"}, {"U_X", "R"}}},
        {"zr_via_c", {{"U_CZ", "C"}, {"U_CZ", "Z"}, {"U_C", "C"}, {"U_C", "R"}}},
    };
    return pieces;
}

const std::vector<CatalogPiece>& r_to_y_pieces() {
    static const std::vector<CatalogPiece> pieces{
        {"ry_common", {{"U_Y", "R"}, {"U_Y", "Y"}}},
        {"ry_via_x", {{"U_X", "R"}, {"U_X", "X"}, {"U_XY", "X"}, {"U_XY", "Y"}}},
        {"ry_via_c", {{"U_C", "R"}, {"U_C", "C"}, {"U_CY", "C"}, {"U_CY", "Y"}}},
    };
    return pieces;
}

const std::vector<CatalogEntry>& violation_catalog() {
    static const std::vector<CatalogEntry> catalog = [] {
        std::vector<CatalogEntry> out;
        auto add = [&](std::string id, std::string family, std::string group, std::string desc,
                       std::vector<Edge> extra, PatternModification mod, Assumption violated,
                       std::optional<std::string> fix = std::nullopt, bool no_fix = false) {
            out.push_back(CatalogEntry{std::move(id), std::move(family), std::move(group), std::move(desc),
                                       catalog_dsl(extra), std::move(mod), violated, std::move(fix), no_fix});
        };

        // mSITA: any Z-to-R pattern together with any R-to-Y pattern.
        for (const auto& zr : z_to_r_pieces()) {
            for (const auto& ry : r_to_y_pieces()) {
                std::vector<Edge> extra = zr.edges;
                extra.insert(extra.end(), ry.edges.begin(), ry.edges.end());
                add("msita/" + zr.id + "+" + ry.id, "msita", "",
                    "collider at R between a " + zr.id + " and a " + ry.id + " pattern", extra,
                    missing_x({{"X", "Z"}}), Assumption::msita);
            }
        }
        add("msita/y_to_r", "msita", "", "outcome causes missingness; sufficient on its own",
            {{"Y", "R"}}, missing_x({{"X", "Z"}}), Assumption::msita, std::nullopt, true);
        add("msita/z_to_r+r_to_y", "msita", "", "treatment causes missingness which causes the outcome",
            {{"Z", "R"}, {"R", "Y"}}, missing_x({{"X", "Z"}}), Assumption::msita, std::nullopt, true);

        // CIT, group A: X still relates to treatment when missing.
        add("cit/A_direct", "cit_cio", "A", "X -> Z retained when X is missing", {}, missing_x({{"X", "Y"}}),
            Assumption::cit);
        add("cit/A_common_cause", "cit_cio", "A", "X <- U_XZ -> Z", {{"U_XZ", "X"}, {"U_XZ", "Z"}},
            missing_x({{"X", "Z"}}), Assumption::cit);
        add("cit/A_via_c", "cit_cio", "A", "X <- U_XC -> C <- U_CZ -> Z",
            {{"U_XC", "X"}, {"U_XC", "C"}, {"U_CZ", "C"}, {"U_CZ", "Z"}}, missing_x({{"X", "Z"}}),
            Assumption::cit);
        // CIT, group B: collider bias through R.
        add("cit/B_x_causes_r", "cit_cio", "B", "X -> R <- U_Z -> Z",
            {{"X", "R"}, {"U_Z", "R"}, {"U_Z", "Z"}}, missing_x({{"X", "Z"}}), Assumption::cit, "U_Z");
        add("cit/B_common_cause", "cit_cio", "B", "X <- U_X -> R <- U_Z -> Z",
            {{"U_X", "X"}, {"U_X", "R"}, {"U_Z", "R"}, {"U_Z", "Z"}}, missing_x({{"X", "Z"}}), Assumption::cit,
            "U_Z");
        add("cit/B_via_c", "cit_cio", "B", "X -> R <- U_C -> C <- U_CZ -> Z",
            {{"X", "R"}, {"U_C", "R"}, {"U_C", "C"}, {"U_CZ", "C"}, {"U_CZ", "Z"}}, missing_x({{"X", "Z"}}),
            Assumption::cit, "U_C");

        // CIO mirrors CIT with the outcome in place of treatment.
        add("cio/A_direct", "cit_cio", "A", "X -> Y retained when X is missing", {}, missing_x({{"X", "Z"}}),
            Assumption::cio);
        add("cio/A_common_cause", "cit_cio", "A", "X <- U_XY -> Y", {{"U_XY", "X"}, {"U_XY", "Y"}},
            missing_x({{"X", "Y"}}), Assumption::cio);
        add("cio/A_via_c", "cit_cio", "A", "X <- U_XC -> C <- U_CY -> Y",
            {{"U_XC", "X"}, {"U_XC", "C"}, {"U_CY", "C"}, {"U_CY", "Y"}}, missing_x({{"X", "Y"}}),
            Assumption::cio);
        add("cio/B_x_causes_r", "cit_cio", "B", "X -> R <- U_Y -> Y",
            {{"X", "R"}, {"U_Y", "R"}, {"U_Y", "Y"}}, missing_x({{"X", "Y"}}), Assumption::cio, "U_Y");
        add("cio/B_common_cause", "cit_cio", "B", "X <- U_X -> R <- U_Y -> Y",
            {{"U_X", "X"}, {"U_X", "R"}, {"U_Y", "R"}, {"U_Y", "Y"}}, missing_x({{"X", "Y"}}), Assumption::cio,
            "U_Y");
        add("cio/B_via_c", "cit_cio", "B", "X -> R <- U_C -> C <- U_CY -> Y",
            {{"X", "R"}, {"U_C", "R"}, {"U_C", "C"}, {"U_CY", "C"}, {"U_CY", "Y"}}, missing_x({{"X", "Y"}}),
            Assumption::cio, "U_C");

        // Treatment or outcome causing missingness (twin networks).
        add("twin/cit_x_and_z_cause_r", "twin", "B", "X -> R <- Z", {{"X", "R"}, {"Z", "R"}},
            missing_x({{"X", "Z"}}), Assumption::cit, std::nullopt, true);
        add("twin/cio_x_and_y_cause_r", "twin", "B", "X -> R <- Y", {{"X", "R"}, {"Y", "R"}},
            missing_x({{"X", "Y"}}), Assumption::cio, std::nullopt, true);
        add("twin/cit_common_cause_z_causes_r", "twin", "B", "X <- U_X -> R <- Z",
            {{"U_X", "X"}, {"U_X", "R"}, {"Z", "R"}}, missing_x({{"X", "Z"}}), Assumption::cit, "U_X");
        add("twin/cio_common_cause_y_causes_r", "twin", "B", "X <- U_X -> R <- Y",
            {{"U_X", "X"}, {"U_X", "R"}, {"Y", "R"}}, missing_x({{"X", "Y"}}), Assumption::cio);
        add("twin/cit_y_causes_r", "twin", "B", "Z -> Y <- X with Y -> R: R is a descendant of the collider Y",
            {{"Y", "R"}}, missing_x({{"X", "Z"}}), Assumption::cit);
        return out;
    }();
    return catalog;
}

}  // namespace mpa
