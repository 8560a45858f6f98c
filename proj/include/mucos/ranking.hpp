#pragma once

#include "mucos/error.hpp"

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace mucos {

inline constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

// Returns up to k items ordered by score descending, ties broken by ascending
// id. `score` maps an item to an unsigned count; ids are compared with `<`.
// Throws ConfigError when k == 0.
template <class Id, class Score>
std::vector<Id> top_k_by_density(std::span<const Id> items, std::size_t k, Score&& score) {
    if (k == 0) throw ConfigError("top-k selection requires k >= 1");
    struct Scored {
        std::size_t score;
        Id id;
    };
    std::vector<Scored> scored;
    scored.reserve(items.size());
    for (const Id& id : items) scored.push_back({static_cast<std::size_t>(score(id)), id});

    const auto better = [](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    };
    const std::size_t keep = std::min(k, scored.size());
    if (keep < scored.size()) {
        std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                          scored.end(), better);
        scored.resize(keep);
    } else {
        std::sort(scored.begin(), scored.end(), better);
    }

    std::vector<Id> out;
    out.reserve(keep);
    for (const Scored& s : scored) out.push_back(s.id);
    return out;
}

template <class Id, class Score>
std::vector<Id> top_k_by_density(const std::vector<Id>& items, std::size_t k, Score&& score) {
    return top_k_by_density(std::span<const Id>(items), k, std::forward<Score>(score));
}

}  // namespace mucos
