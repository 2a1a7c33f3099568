#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace boundlab {

enum class Sense { minimize, maximize };
enum class Rel { le, ge, eq };

struct ConsRow {
  std::vector<std::pair<int, double>> entries;  // (column, coefficient)
  Rel rel = Rel::le;
  double rhs = 0.0;
};

// A MILP in canonical minimization form. Maximization instances store the
// negated objective and keep sense == maximize for reporting; every solver
// and metric in the project works on the stored (minimization) objective.
struct MilpInstance {
  std::string name;
  Sense sense = Sense::minimize;
  int num_vars = 0;
  int num_cons = 0;
  std::vector<double> obj;
  std::vector<ConsRow> cons;
  std::vector<double> var_lb;
  std::vector<double> var_ub;
  std::vector<uint8_t> is_integer;
  uint64_t seed = 0;

  int num_integer_vars() const {
    int n = 0;
    for (uint8_t f : is_integer) n += f ? 1 : 0;
    return n;
  }

  // Checks index ranges, bound ordering and vector sizes; throws
  // std::invalid_argument with the offending field.
  void validate() const;
};

MilpInstance generate_set_covering(int rows, int cols, double density, uint64_t seed,
                                   int cost_range = 100);
MilpInstance generate_combinatorial_auction(int items, int bids, uint64_t seed);
MilpInstance generate_cap_facility_location(int customers, int facilities,
                                            double capacity_ratio, uint64_t seed);

class parse_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class schema_version_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Structured-text (JSON) instance files, schema_version 1. Round-trip is an
// identity on every field.
void write_instance(const MilpInstance& inst, const std::filesystem::path& path);
MilpInstance read_instance(const std::filesystem::path& path);

std::string instance_to_string(const MilpInstance& inst);
MilpInstance instance_from_string(const std::string& text);

}  // namespace boundlab
