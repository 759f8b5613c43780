#include "pipesizer/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <queue>
#include <unordered_set>
#include <utility>

#include <fmt/format.h>

#include "pipesizer/errors.hpp"

namespace pipesizer {

namespace {

constexpr double kCubicFoot = kMetresPerFoot * kMetresPerFoot * kMetresPerFoot;
constexpr double kUsGallon = 3.785411784e-3;

bool nearly_equal(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

UnitSystem UnitSystem::from_flow_units(std::string_view keyword) {
  std::string key(keyword);
  std::transform(key.begin(), key.end(), key.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  UnitSystem u;
  u.flow_units = key;
  const bool us = key == "CFS" || key == "GPM" || key == "MGD";
  if (us) {
    u.length_to_m = kMetresPerFoot;
    u.diameter_to_m = kMetresPerInch;
  } else {
    u.length_to_m = 1.0;
    u.diameter_to_m = 0.001;
  }
  if (key == "CFS") {
    u.flow_to_m3s = kCubicFoot;
  } else if (key == "GPM") {
    u.flow_to_m3s = kUsGallon / 60.0;
  } else if (key == "MGD") {
    u.flow_to_m3s = kUsGallon * 1e6 / 86400.0;
  } else if (key == "LPS") {
    u.flow_to_m3s = 1e-3;
  } else if (key == "LPM") {
    u.flow_to_m3s = 1e-3 / 60.0;
  } else if (key == "MLD") {
    u.flow_to_m3s = 1e3 / 86400.0;
  } else if (key == "CMH") {
    u.flow_to_m3s = 1.0 / 3600.0;
  } else if (key == "CMD") {
    u.flow_to_m3s = 1.0 / 86400.0;
  } else if (key == "CMS") {
    u.flow_to_m3s = 1.0;
  } else {
    throw Error(fmt::format("unsupported flow units '{}'", keyword));
  }
  return u;
}

std::string_view UnitSystem::diameter_symbol() const noexcept {
  return us_customary() ? "in" : "mm";
}

// ---------------------------------------------------------------------------
// DiameterTable

DiameterTable DiameterTable::tabulated(std::vector<double> sizes, std::vector<double> unit_costs) {
  if (sizes.empty()) throw StructuralError("diameter table is empty");
  if (sizes.size() != unit_costs.size()) {
    throw StructuralError(fmt::format("diameter table has {} sizes but {} unit costs",
                                      sizes.size(), unit_costs.size()));
  }
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    if (sizes[k] < 0.0) throw StructuralError("negative commercial diameter");
    if (k > 0 && !(sizes[k] > sizes[k - 1])) {
      throw StructuralError("commercial diameters must be strictly ascending");
    }
    if (k > 0 && unit_costs[k] < unit_costs[k - 1]) {
      throw StructuralError("unit costs must be nondecreasing in diameter");
    }
    if (sizes[k] == 0.0 && unit_costs[k] != 0.0) {
      throw StructuralError("the zero diameter must cost nothing");
    }
  }
  DiameterTable t;
  t.sizes_ = std::move(sizes);
  t.unit_costs_ = std::move(unit_costs);
  t.model_ = CostModel::kTabulated;
  return t;
}

DiameterTable DiameterTable::power_law(std::vector<double> sizes, double coefficient,
                                       double exponent, double diameter_unit) {
  if (!(coefficient > 0.0) || !(exponent > 0.0) || !(diameter_unit > 0.0)) {
    throw StructuralError("power-law cost parameters must be positive");
  }
  std::vector<double> costs;
  costs.reserve(sizes.size());
  for (double d : sizes) costs.push_back(coefficient * std::pow(d / diameter_unit, exponent));
  DiameterTable t = tabulated(std::move(sizes), std::move(costs));
  t.model_ = CostModel::kPowerLaw;
  t.coefficient_ = coefficient;
  t.exponent_ = exponent;
  t.diameter_unit_ = diameter_unit;
  return t;
}

std::optional<std::size_t> DiameterTable::index_of(double diameter) const {
  auto it = std::lower_bound(sizes_.begin(), sizes_.end(), diameter);
  if (it != sizes_.end() && nearly_equal(*it, diameter)) {
    return static_cast<std::size_t>(it - sizes_.begin());
  }
  if (it != sizes_.begin() && nearly_equal(*(it - 1), diameter)) {
    return static_cast<std::size_t>(it - sizes_.begin() - 1);
  }
  return std::nullopt;
}

DiameterTable::Bracket DiameterTable::bracket(double diameter) const {
  if (empty()) throw StructuralError("diameter table is empty");
  if (auto k = index_of(diameter)) return {*k, *k};
  if (diameter < min() || diameter > max() || std::isnan(diameter)) {
    throw OutOfRangeError(fmt::format("diameter {} m outside commercial range [{}, {}] m",
                                      diameter, min(), max()));
  }
  auto it = std::upper_bound(sizes_.begin(), sizes_.end(), diameter);
  const auto upper = static_cast<std::size_t>(it - sizes_.begin());
  return {upper - 1, upper};
}

double DiameterTable::unit_cost(double diameter) const {
  const Bracket b = bracket(diameter);
  if (b.lower == b.upper) return unit_costs_[b.lower];
  if (model_ == CostModel::kPowerLaw) {
    return coefficient_ * std::pow(diameter / diameter_unit_, exponent_);
  }
  const double t = (diameter - sizes_[b.lower]) / (sizes_[b.upper] - sizes_[b.lower]);
  return unit_costs_[b.lower] + t * (unit_costs_[b.upper] - unit_costs_[b.lower]);
}

// ---------------------------------------------------------------------------
// PipeNetwork

PipeNetwork::PipeNetwork(std::string name, std::vector<Node> nodes, std::vector<Pipe> pipes,
                         DiameterTable table, UnitSystem units, DesignSettings settings)
    : name_(std::move(name)),
      nodes_(std::move(nodes)),
      pipes_(std::move(pipes)),
      table_(std::move(table)),
      units_(std::move(units)),
      settings_(std::move(settings)) {
  std::unordered_set<std::string> seen;
  std::size_t reservoirs = 0;
  for (const Node& n : nodes_) {
    if (!seen.insert(n.id).second) throw StructuralError("duplicate node id '" + n.id + "'");
    if (n.is_reservoir()) {
      ++reservoirs;
      if (n.min_head) throw StructuralError("reservoir '" + n.id + "' cannot carry a minimum head");
    } else if (n.demand < 0.0) {
      throw StructuralError("junction '" + n.id + "' has negative demand");
    }
  }
  if (reservoirs == 0) throw StructuralError("network has no reservoir");

  seen.clear();
  std::vector<std::optional<std::size_t>> by_decision;
  for (std::size_t p = 0; p < pipes_.size(); ++p) {
    const Pipe& pipe = pipes_[p];
    if (!seen.insert(pipe.id).second) throw StructuralError("duplicate pipe id '" + pipe.id + "'");
    if (pipe.from >= nodes_.size() || pipe.to >= nodes_.size()) {
      throw StructuralError("pipe '" + pipe.id + "' references a missing node");
    }
    if (pipe.from == pipe.to) throw StructuralError("pipe '" + pipe.id + "' is a self loop");
    if (!(pipe.length > 0.0)) throw StructuralError("pipe '" + pipe.id + "' has nonpositive length");
    if (!(pipe.roughness > 0.0)) {
      throw StructuralError("pipe '" + pipe.id + "' has nonpositive roughness");
    }
    if (pipe.existing_diameter && !(*pipe.existing_diameter > 0.0)) {
      throw StructuralError("pipe '" + pipe.id + "' has nonpositive diameter");
    }
    if (!pipe.decision_index && !pipe.existing_diameter) {
      throw StructuralError("fixed pipe '" + pipe.id + "' has no diameter");
    }
    if (pipe.decision_index) {
      const std::size_t k = *pipe.decision_index;
      if (k >= by_decision.size()) by_decision.resize(k + 1);
      if (by_decision[k]) {
        throw StructuralError(fmt::format("decision index {} used twice", k));
      }
      by_decision[k] = p;
    }
  }
  decision_pipes_.reserve(by_decision.size());
  for (std::size_t k = 0; k < by_decision.size(); ++k) {
    if (!by_decision[k]) throw StructuralError(fmt::format("decision index {} is unused", k));
    decision_pipes_.push_back(*by_decision[k]);
  }
  if (!decision_pipes_.empty() && table_.empty()) {
    throw StructuralError("decision pipes require a diameter table");
  }

  // Connectivity over the full pipe graph.
  std::vector<std::vector<std::size_t>> adjacency(nodes_.size());
  for (const Pipe& pipe : pipes_) {
    adjacency[pipe.from].push_back(pipe.to);
    adjacency[pipe.to].push_back(pipe.from);
  }
  std::vector<bool> reached(nodes_.size(), false);
  std::queue<std::size_t> frontier;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].is_reservoir()) {
      reached[i] = true;
      frontier.push(i);
    }
  }
  while (!frontier.empty()) {
    const std::size_t i = frontier.front();
    frontier.pop();
    for (std::size_t j : adjacency[i]) {
      if (!reached[j]) {
        reached[j] = true;
        frontier.push(j);
      }
    }
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!reached[i]) throw StructuralError("node '" + nodes_[i].id + "' is not connected");
  }
}

std::size_t PipeNetwork::reservoir_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.is_reservoir(); }));
}

std::optional<std::size_t> PipeNetwork::find_node(std::string_view id) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].id == id) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> PipeNetwork::find_pipe(std::string_view id) const {
  for (std::size_t i = 0; i < pipes_.size(); ++i) {
    if (pipes_[i].id == id) return i;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Designs

void validate_design(const PipeNetwork& network, const DesignVector& design) {
  if (design.size() != network.decision_count()) {
    throw StructuralError(fmt::format("design has {} values but the network has {} decision pipes",
                                      design.size(), network.decision_count()));
  }
  const DiameterTable& table = network.diameter_table();
  for (std::size_t k = 0; k < design.size(); ++k) {
    const double d = design[k];
    if (std::isnan(d) || d < table.min() - 1e-12 || d > table.max() + 1e-12) {
      throw OutOfRangeError(fmt::format("decision {} diameter {} m outside [{}, {}] m", k, d,
                                        table.min(), table.max()));
    }
    if (design.flavor == DesignFlavor::kCommercial && !table.index_of(d)) {
      throw OutOfRangeError(fmt::format("decision {} diameter {} m is not a commercial size", k, d));
    }
  }
}

bool is_commercial(std::span<const double> diameters, const DiameterTable& table) {
  return std::all_of(diameters.begin(), diameters.end(),
                     [&](double d) { return table.index_of(d).has_value(); });
}

double round_to_commercial(double diameter, const DiameterTable& table) {
  const auto b = table.bracket(diameter);
  const auto sizes = table.sizes();
  if (b.lower == b.upper) return sizes[b.lower];
  const double mid = 0.5 * (sizes[b.lower] + sizes[b.upper]);
  // Values within rounding noise of the midpoint count as the midpoint (goes up).
  return diameter < mid - 1e-12 * std::max(1.0, mid) ? sizes[b.lower] : sizes[b.upper];
}

DesignVector round_to_commercial(const DesignVector& design, const DiameterTable& table) {
  DesignVector out;
  out.flavor = DesignFlavor::kCommercial;
  out.diameters.reserve(design.size());
  for (double d : design.diameters) out.diameters.push_back(round_to_commercial(d, table));
  return out;
}

DesignVector uniform_design(const PipeNetwork& network, double diameter) {
  DesignVector d{std::vector<double>(network.decision_count(), diameter),
                 network.diameter_table().index_of(diameter) ? DesignFlavor::kCommercial
                                                             : DesignFlavor::kContinuous};
  if (d.flavor == DesignFlavor::kCommercial) {
    const auto k = *network.diameter_table().index_of(diameter);
    std::fill(d.diameters.begin(), d.diameters.end(), network.diameter_table().sizes()[k]);
  }
  return d;
}

DesignVector max_design(const PipeNetwork& network) {
  return uniform_design(network, network.diameter_table().max());
}

DesignVector min_design(const PipeNetwork& network) {
  return uniform_design(network, network.diameter_table().min());
}

boost::multiprecision::cpp_int search_space_size(const PipeNetwork& network) {
  if (network.diameter_table().empty()) throw StructuralError("diameter table is empty");
  boost::multiprecision::cpp_int result = 1;
  const boost::multiprecision::cpp_int options = network.diameter_table().size();
  for (std::size_t k = 0; k < network.decision_count(); ++k) result *= options;
  return result;
}

std::string format_scientific(const boost::multiprecision::cpp_int& value, int digits) {
  const std::string text = value.str();
  if (text.size() <= 1 || digits < 1) return text;
  // Round the leading digits by hand; cpp_int has no floating conversion for
  // values beyond double range (50NYTP has ~1264 digits).
  const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(digits), text.size());
  std::string mantissa = text.substr(0, keep);
  int exponent = static_cast<int>(text.size()) - 1;
  if (keep < text.size() && text[keep] >= '5') {
    int i = static_cast<int>(keep) - 1;
    while (i >= 0 && mantissa[static_cast<std::size_t>(i)] == '9') {
      mantissa[static_cast<std::size_t>(i)] = '0';
      --i;
    }
    if (i < 0) {
      mantissa.insert(mantissa.begin(), '1');
      mantissa.pop_back();
      ++exponent;
    } else {
      ++mantissa[static_cast<std::size_t>(i)];
    }
  }
  std::string out(1, mantissa[0]);
  if (mantissa.size() > 1) out += "." + mantissa.substr(1);
  return out + "e+" + std::to_string(exponent);
}

}  // namespace pipesizer
