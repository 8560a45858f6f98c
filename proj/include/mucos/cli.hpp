#pragma once
// Command-line front end. Subcommands: stats, train, evaluate, aggregate,
// predict, cost, bench, synth, context.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace mucos {

// Returns the process exit code: 0 iff no error record was emitted.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

std::size_t edit_distance(std::string_view a, std::string_view b);
// Up to `n` labels closest to `query` by edit distance, ties by label order.
std::vector<std::string> nearest_labels(const std::vector<std::string>& labels, std::string_view query,
                                        std::size_t n = 3);

}  // namespace mucos
