#pragma once

#include "kis/cw.hpp"

#include <set>

namespace kis {

// Face poset of a simplicial complex given by its facets. Simplices are
// named by their sorted vertex labels joined with '-'; incidence of the face
// missing the i-th vertex is (-1)^i.
inline CWPtr simplicial_cw(const std::vector<std::vector<int>>& facets) {
    std::set<std::vector<int>> all;
    for (auto f : facets) {
        std::sort(f.begin(), f.end());
        if (std::adjacent_find(f.begin(), f.end()) != f.end()) throw StructuralError("facet repeats a vertex");
        const int n = static_cast<int>(f.size());
        if (n > 20) throw StructuralError("facet too large");
        for (int mask = 1; mask < (1 << n); ++mask) {
            std::vector<int> s;
            for (int i = 0; i < n; ++i)
                if (mask & (1 << i)) s.push_back(f[i]);
            all.insert(std::move(s));
        }
    }
    std::vector<std::vector<int>> simplices(all.begin(), all.end());
    std::stable_sort(simplices.begin(), simplices.end(),
                     [](const auto& a, const auto& b) { return a.size() < b.size(); });
    std::map<std::vector<int>, int> idx;
    std::vector<std::string> names;
    std::vector<int> dims;
    for (const auto& s : simplices) {
        idx[s] = static_cast<int>(names.size());
        std::string nm;
        for (std::size_t i = 0; i < s.size(); ++i) nm += (i ? "-" : "") + std::to_string(s[i]);
        names.push_back(nm);
        dims.push_back(static_cast<int>(s.size()) - 1);
    }
    std::vector<Cover> covers;
    for (const auto& s : simplices) {
        if (s.size() < 2) continue;
        for (std::size_t i = 0; i < s.size(); ++i) {
            auto t = s;
            t.erase(t.begin() + static_cast<long>(i));
            covers.push_back({idx.at(t), idx.at(s), i % 2 == 0 ? 1 : -1});
        }
    }
    return std::make_shared<const CWPoset>(std::move(names), std::move(dims), std::move(covers));
}

}  // namespace kis
