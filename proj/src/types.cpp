#include "unfold/types.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace unfold {

namespace {

std::string describe_components(const std::vector<std::vector<Index>>& comps) {
    std::ostringstream os;
    os << "neighbor graph is disconnected (" << comps.size() << " components):";
    for (std::size_t c = 0; c < comps.size(); ++c) {
        os << " {";
        const auto& members = comps[c];
        const std::size_t shown = std::min<std::size_t>(members.size(), 8);
        for (std::size_t i = 0; i < shown; ++i) {
            os << (i ? "," : "") << members[i];
        }
        if (members.size() > shown) os << ",...(" << members.size() << " points)";
        os << "}";
    }
    return os.str();
}

}  // namespace

DisconnectedGraph::DisconnectedGraph(std::vector<std::vector<Index>> components)
    : DataError(describe_components(components)), components_(std::move(components)) {}

Dataset::Dataset(Matrix pts, std::optional<std::vector<std::string>> lbls,
                 std::optional<std::vector<std::string>> acts)
    : points(std::move(pts)), labels(std::move(lbls)), actions(std::move(acts)) {}

void Dataset::validate() const {
    if (size() < 2) throw InvalidArgument("dataset needs at least 2 points");
    if (dim() < 1) throw InvalidArgument("dataset points need at least one coordinate");
    if (!points.allFinite()) throw InvalidArgument("dataset contains non-finite coordinates");
    if (labels && static_cast<Index>(labels->size()) != size()) {
        throw InvalidArgument("label count does not match point count");
    }
    if (actions && static_cast<Index>(actions->size()) != size() - 1) {
        throw InvalidArgument("action count must be point count - 1");
    }
}

ClassIndex index_classes(const std::vector<std::string>& labels) {
    ClassIndex out;
    std::map<std::string, Index> seen;
    out.of_point.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto [it, inserted] = seen.emplace(labels[i], out.count());
        if (inserted) {
            out.names.push_back(labels[i]);
            out.members.emplace_back();
        }
        out.of_point.push_back(it->second);
        out.members[it->second].push_back(static_cast<Index>(i));
    }
    return out;
}

}  // namespace unfold
