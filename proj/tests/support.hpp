#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "reservesim/engine.hpp"

namespace rs_test {

using namespace reservesim;

inline Money U(std::int64_t units) { return Money::units(units); }
inline Money C(std::int64_t cents) { return Money::minor(cents); }

// Worked balance-sheet tables, whole units.
struct Row {
  std::string bank;
  std::int64_t deposits, loans, cash, equity;
};
struct Table {
  std::string label;
  std::vector<Row> rows;
  std::int64_t money, debt;
};

const std::vector<Table>& loophole1_tables();
const std::vector<Table>& loophole2_tables();

const MetricsSnapshot* find_label(const MetricsSeries& series, std::string_view label);
// Empty when the snapshot matches the table exactly.
std::string compare_table(const MetricsSnapshot& snap, const Table& table);

// Hand ledger for the equity loop, in minor units, written without the
// library. One checkpoint per completed cycle.
struct Loophole2Checkpoint {
  std::int64_t loan, money, book_equity, regulatory_equity;
};
std::vector<Loophole2Checkpoint> loophole2_oracle(int cycles);

// Frozen output of loophole2_oracle for cycles 1..6.
const std::vector<Loophole2Checkpoint>& loophole2_fixture();

// cumulative-floor recursion M(k+1) = M0 + floor((1 - r) M(k)) in minor units
std::vector<std::int64_t> textbook_oracle(std::int64_t m0, std::int64_t r_num, std::int64_t r_den, int rounds);

// Randomized small-state properties. Each call builds one random state and
// checks it; returns an empty string on success, otherwise the violation.
// `skipped` is set when the random draw could not produce a usable case.
std::string repayment_asymmetry_case(std::mt19937_64& rng, bool& skipped);
std::string regulatory_gate_case(std::mt19937_64& rng, bool& skipped);

struct PropertyTally {
  int checked = 0;
  int violations = 0;
  std::string first_violation;
};
PropertyTally run_property(std::string (*one_case)(std::mt19937_64&, bool&), int cases, std::uint64_t seed);

} // namespace rs_test
