#pragma once

#include "mucos/kg_store.hpp"

#include <string>
#include <vector>

namespace mucos {

// relation: (h, ?, t) over the relation vocabulary.
// tail:     (h, r, ?) over the entity vocabulary.
enum class Task { relation, tail };

std::string to_string(Task task);
Task parse_task(const std::string& text);

inline std::size_t truth_of(Task task, const Triple& t) {
    return task == Task::relation ? index_of(t.relation) : index_of(t.tail);
}

// Anything that turns a query into a probability distribution over the task's
// class space. The masked slot of `query` must be ignored.
class Scorer {
public:
    virtual ~Scorer() = default;
    virtual std::vector<double> score(Task task, const Triple& query) const = 0;
};

}  // namespace mucos
