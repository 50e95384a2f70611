#pragma once

// Model identifiers used by the command-line tool.

#include <memory>
#include <string>
#include <vector>

#include "nncrit/models/extended.hpp"
#include "nncrit/models/gaussian.hpp"
#include "nncrit/models/graph.hpp"
#include "nncrit/models/graphical.hpp"
#include "nncrit/models/von_mises.hpp"

namespace nncrit::models {

inline const std::vector<std::string>& model_identifiers() {
    static const std::vector<std::string> ids{"nn-gaussian-1d", "ggm", "tggm", "log-ggm", "bvm", "bvm-indep", "nn-gmm"};
    return ids;
}

struct ModelRequest {
    std::string id;
    GraphSpec graph;  // graph-based families
    int components = 1;  // nn-gmm
};

/// Family behind a model identifier. nn-gmm maps to the 1-D Gaussian family;
/// its component count lives in the ExtendedModel.
inline FamilyPtr make_family(const ModelRequest& req) {
    if (req.id == "nn-gaussian-1d" || req.id == "nn-gmm") return std::make_shared<NNGaussian1D>();
    if (req.id == "ggm") return std::make_shared<GGM>(req.graph);
    if (req.id == "tggm") return std::make_shared<TruncatedGGM>(req.graph);
    if (req.id == "log-ggm") return std::make_shared<LogGGM>(req.graph);
    if (req.id == "bvm") return std::make_shared<BivariateVonMises>(true);
    if (req.id == "bvm-indep") return std::make_shared<BivariateVonMises>(false);
    std::string known;
    for (const auto& s : model_identifiers()) known += (known.empty() ? "" : ", ") + s;
    throw ParseError("unknown model '" + req.id + "' (known: " + known + ")");
}

inline ExtendedModel make_extended(const ModelRequest& req) {
    if (req.id != "nn-gmm" && req.components != 1)
        throw CapabilityError("model '" + req.id + "' has no mixture form; only nn-gmm takes K > 1");
    return ExtendedModel(make_family(req), req.components);
}

inline bool uses_graph(const std::string& id) { return id == "ggm" || id == "tggm" || id == "log-ggm"; }

}  // namespace nncrit::models
