#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace pipesizer {

// Exact conversion factors used at ingestion. Everything below this layer is SI.
inline constexpr double kMetresPerFoot = 0.3048;
inline constexpr double kMetresPerInch = 0.0254;

// Native unit system of an ingested file, keyed by the EPANET flow-unit keyword.
// US keywords imply feet / inches, SI keywords metres / millimetres.
struct UnitSystem {
  std::string flow_units = "CMH";
  double length_to_m = 1.0;      // pipe lengths, elevations and heads
  double diameter_to_m = 0.001;  // pipe diameters
  double flow_to_m3s = 1.0 / 3600.0;

  static UnitSystem from_flow_units(std::string_view keyword);
  static UnitSystem si() { return from_flow_units("CMS"); }

  bool us_customary() const noexcept { return length_to_m != 1.0; }
  std::string_view length_symbol() const noexcept { return us_customary() ? "ft" : "m"; }
  std::string_view diameter_symbol() const noexcept;

  friend bool operator==(const UnitSystem&, const UnitSystem&) = default;
};

enum class NodeKind { kJunction, kReservoir };

struct Node {
  std::string id;
  NodeKind kind = NodeKind::kJunction;
  double elevation = 0.0;  // m
  double demand = 0.0;     // m^3/s, junctions only
  double head = 0.0;       // m, fixed total head, reservoirs only
  std::optional<double> min_head;  // m, total head floor

  bool is_reservoir() const noexcept { return kind == NodeKind::kReservoir; }

  friend bool operator==(const Node&, const Node&) = default;
};

struct Pipe {
  std::string id;
  std::size_t from = 0;  // node index
  std::size_t to = 0;
  double length = 0.0;     // m
  double roughness = 0.0;  // Hazen-Williams C
  // For decision pipes in duplication problems this is the tunnel that is
  // always present; the decision diameter is laid in parallel. For fixed
  // pipes it is the only diameter.
  std::optional<double> existing_diameter;  // m
  std::optional<std::size_t> decision_index;

  friend bool operator==(const Pipe&, const Pipe&) = default;
};

// Commercial sizes and their cost per unit length. Costs are per *native*
// length unit (ft for NYTP, m for Hanoi) in the benchmark's currency.
class DiameterTable {
 public:
  enum class CostModel { kTabulated, kPowerLaw };

  struct Bracket {
    std::size_t lower;  // index of largest size <= d
    std::size_t upper;  // index of smallest size >= d
  };

  DiameterTable() = default;

  static DiameterTable tabulated(std::vector<double> sizes, std::vector<double> unit_costs);
  // unit cost = coefficient * (d / diameter_unit)^exponent, e.g. Hanoi 1.1 D[in]^1.5.
  static DiameterTable power_law(std::vector<double> sizes, double coefficient,
                                 double exponent, double diameter_unit);

  std::span<const double> sizes() const noexcept { return sizes_; }
  std::size_t size() const noexcept { return sizes_.size(); }
  bool empty() const noexcept { return sizes_.empty(); }
  double min() const { return sizes_.front(); }
  double max() const { return sizes_.back(); }

  CostModel cost_model() const noexcept { return model_; }
  double coefficient() const noexcept { return coefficient_; }
  double exponent() const noexcept { return exponent_; }
  double diameter_unit() const noexcept { return diameter_unit_; }

  // Cost per unit length of commercial size k.
  double unit_cost_at(std::size_t k) const { return unit_costs_.at(k); }
  // Cost per unit length of an arbitrary diameter in [min, max]. Tabulated
  // tables interpolate linearly between bracketing sizes.
  double unit_cost(double diameter) const;

  // Index of d if it is a commercial size (relative tolerance 1e-9).
  std::optional<std::size_t> index_of(double diameter) const;
  // Throws OutOfRangeError outside [min, max].
  Bracket bracket(double diameter) const;

  friend bool operator==(const DiameterTable&, const DiameterTable&) = default;

 private:
  std::vector<double> sizes_;
  std::vector<double> unit_costs_;
  CostModel model_ = CostModel::kTabulated;
  double coefficient_ = 0.0;
  double exponent_ = 0.0;
  double diameter_unit_ = 1.0;
};

// Benchmark-specific optimisation settings carried alongside the network.
struct DesignSettings {
  double pressure_penalty = 1e7;  // currency per native head unit
  double diameter_penalty = 1e7;  // currency per unit of diameter violation
  bool nytp_special = false;      // low-range diameter penalty with peak 3
  std::optional<double> phi;          // repair trigger threshold
  std::optional<double> target_cost;  // best-known cost, for success rates

  friend bool operator==(const DesignSettings&, const DesignSettings&) = default;
};

// Immutable topology plus physical data, validated on construction.
class PipeNetwork {
 public:
  PipeNetwork(std::string name, std::vector<Node> nodes, std::vector<Pipe> pipes,
              DiameterTable table, UnitSystem units, DesignSettings settings = {});

  const std::string& name() const noexcept { return name_; }
  std::span<const Node> nodes() const noexcept { return nodes_; }
  std::span<const Pipe> pipes() const noexcept { return pipes_; }
  const Node& node(std::size_t i) const { return nodes_.at(i); }
  const Pipe& pipe(std::size_t i) const { return pipes_.at(i); }
  const DiameterTable& diameter_table() const noexcept { return table_; }
  const UnitSystem& units() const noexcept { return units_; }
  const DesignSettings& settings() const noexcept { return settings_; }

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t pipe_count() const noexcept { return pipes_.size(); }
  std::size_t decision_count() const noexcept { return decision_pipes_.size(); }
  std::size_t reservoir_count() const noexcept;

  // Pipe index for decision variable k.
  std::size_t decision_pipe(std::size_t k) const { return decision_pipes_.at(k); }
  std::optional<std::size_t> find_node(std::string_view id) const;
  std::optional<std::size_t> find_pipe(std::string_view id) const;

  friend bool operator==(const PipeNetwork&, const PipeNetwork&) = default;

 private:
  std::string name_;
  std::vector<Node> nodes_;
  std::vector<Pipe> pipes_;
  DiameterTable table_;
  UnitSystem units_;
  DesignSettings settings_;
  std::vector<std::size_t> decision_pipes_;
};

enum class DesignFlavor { kContinuous, kDiscreteStepped, kCommercial };

// One diameter (m) per decision pipe.
struct DesignVector {
  std::vector<double> diameters;
  DesignFlavor flavor = DesignFlavor::kContinuous;

  std::size_t size() const noexcept { return diameters.size(); }
  double operator[](std::size_t i) const { return diameters[i]; }
  double& operator[](std::size_t i) { return diameters[i]; }

  friend bool operator==(const DesignVector&, const DesignVector&) = default;
};

// Throws StructuralError on length mismatch and OutOfRangeError when a value
// leaves the table bounds; for commercial designs every value must be a size.
void validate_design(const PipeNetwork& network, const DesignVector& design);

bool is_commercial(std::span<const double> diameters, const DiameterTable& table);

// Nearer of the two bracketing sizes; an exact midpoint goes up.
double round_to_commercial(double diameter, const DiameterTable& table);
DesignVector round_to_commercial(const DesignVector& design, const DiameterTable& table);

// Every pipe at the largest (smallest) commercial size.
DesignVector uniform_design(const PipeNetwork& network, double diameter);
DesignVector max_design(const PipeNetwork& network);
DesignVector min_design(const PipeNetwork& network);

// |sizes|^N.
boost::multiprecision::cpp_int search_space_size(const PipeNetwork& network);
// "1.934e+25"-style rendering of a big integer.
std::string format_scientific(const boost::multiprecision::cpp_int& value, int digits = 4);

}  // namespace pipesizer
