#include "pipesizer/inp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

#include "pipesizer/errors.hpp"

namespace pipesizer {

namespace fixtures {
// Generated from core/data/*.net at configure time.
extern const char* const kNytp;
extern const char* const kHanoi;
}  // namespace fixtures

namespace {

using Kind = ParseError::Kind;

struct Row {
  std::size_t line = 0;
  std::vector<std::string> tokens;
};

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) tokens.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

double to_number(const std::string& token, std::size_t line) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ParseError(Kind::kBadNumber, line, fmt::format("'{}' is not a number", token));
  }
  return value;
}

// Section name -> rows, in file order.
std::map<std::string, std::vector<Row>> tokenize(std::string_view text) {
  std::map<std::string, std::vector<Row>> sections;
  std::string current;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto semi = line.find(';'); semi != std::string_view::npos) line = line.substr(0, semi);
    auto tokens = split(line);
    if (tokens.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (tokens.front().front() == '[') {
      const std::string& head = tokens.front();
      if (head.back() != ']' || tokens.size() != 1) {
        throw ParseError(Kind::kSyntax, line_no, "malformed section header");
      }
      current = upper(head.substr(1, head.size() - 2));
      sections[current];
    } else if (current.empty()) {
      throw ParseError(Kind::kSyntax, line_no, "data before the first section header");
    } else {
      sections[current].push_back({line_no, std::move(tokens)});
    }
    if (end == text.size()) break;
  }
  return sections;
}

void require_columns(const Row& row, std::size_t n, std::string_view section) {
  if (row.tokens.size() < n) {
    throw ParseError(Kind::kSyntax, row.line,
                     fmt::format("[{}] row needs at least {} columns", section, n));
  }
}

struct DesignSection {
  bool duplicate = false;
  std::optional<std::vector<std::pair<std::string, std::size_t>>> decision;  // id, line
  bool decision_all = false;
  std::vector<double> diameters;
  std::vector<double> unit_costs;
  std::size_t diameters_line = 0;
  bool power_law = false;
  double coefficient = 0.0, exponent = 0.0, diameter_unit = 1.0;
  struct HeadRule {
    std::string node;  // "*" for all junctions
    double value;
    bool pressure;
    std::size_t line;
  };
  std::vector<HeadRule> head_rules;
  DesignSettings settings;
};

DesignSection read_design(const std::vector<Row>& rows) {
  DesignSection d;
  for (const Row& row : rows) {
    const std::string key = upper(row.tokens.front());
    const auto args = std::span(row.tokens).subspan(1);
    auto one_number = [&]() {
      if (args.size() != 1) throw ParseError(Kind::kSyntax, row.line, key + " takes one value");
      return to_number(args[0], row.line);
    };
    if (key == "MODE") {
      if (args.size() != 1) throw ParseError(Kind::kSyntax, row.line, "Mode takes one value");
      const std::string mode = upper(args[0]);
      if (mode == "DUPLICATE") {
        d.duplicate = true;
      } else if (mode == "REPLACE") {
        d.duplicate = false;
      } else {
        throw ParseError(Kind::kSyntax, row.line, "Mode must be DUPLICATE or REPLACE");
      }
    } else if (key == "DECISION") {
      if (args.size() == 1 && upper(args[0]) == "ALL") {
        d.decision_all = true;
      } else {
        if (!d.decision) d.decision.emplace();
        for (const auto& id : args) d.decision->emplace_back(id, row.line);
      }
    } else if (key == "DIAMETERS") {
      d.diameters_line = row.line;
      for (const auto& t : args) d.diameters.push_back(to_number(t, row.line));
    } else if (key == "UNITCOSTS") {
      for (const auto& t : args) d.unit_costs.push_back(to_number(t, row.line));
    } else if (key == "COSTMODEL") {
      if (args.empty()) throw ParseError(Kind::kSyntax, row.line, "CostModel needs a kind");
      const std::string model = upper(args[0]);
      if (model == "TABLE") {
        d.power_law = false;
      } else if (model == "POWER") {
        if (args.size() != 4) {
          throw ParseError(Kind::kSyntax, row.line,
                           "CostModel POWER takes coefficient, exponent and diameter unit");
        }
        d.power_law = true;
        d.coefficient = to_number(args[1], row.line);
        d.exponent = to_number(args[2], row.line);
        const std::string unit = upper(args[3]);
        if (unit == "IN") {
          d.diameter_unit = kMetresPerInch;
        } else if (unit == "MM") {
          d.diameter_unit = 0.001;
        } else if (unit == "M") {
          d.diameter_unit = 1.0;
        } else {
          throw ParseError(Kind::kSyntax, row.line, "diameter unit must be IN, MM or M");
        }
      } else {
        throw ParseError(Kind::kSyntax, row.line, "CostModel must be TABLE or POWER");
      }
    } else if (key == "MINHEAD" || key == "MINPRESSURE") {
      if (args.size() != 2) {
        throw ParseError(Kind::kSyntax, row.line, key + " takes a node id (or *) and a value");
      }
      d.head_rules.push_back({args[0], to_number(args[1], row.line), key == "MINPRESSURE", row.line});
    } else if (key == "PRESSUREPENALTY") {
      d.settings.pressure_penalty = one_number();
    } else if (key == "DIAMETERPENALTY") {
      d.settings.diameter_penalty = one_number();
    } else if (key == "NYTPSPECIAL") {
      if (args.size() != 1) throw ParseError(Kind::kSyntax, row.line, "NytpSpecial takes YES or NO");
      d.settings.nytp_special = upper(args[0]) == "YES";
    } else if (key == "PHI") {
      d.settings.phi = one_number();
    } else if (key == "TARGET") {
      d.settings.target_cost = one_number();
    } else {
      throw ParseError(Kind::kSyntax, row.line, "unknown [DESIGN] key '" + row.tokens.front() + "'");
    }
  }
  if (d.diameters.empty()) throw ParseError(Kind::kMissingDesign, 0, "[DESIGN] lists no Diameters");
  if (!d.power_law && d.unit_costs.size() != d.diameters.size()) {
    throw ParseError(Kind::kSyntax, d.diameters_line,
                     fmt::format("{} diameters but {} unit costs", d.diameters.size(),
                                 d.unit_costs.size()));
  }
  if (!d.decision_all && !d.decision) d.decision_all = true;
  return d;
}

std::string format_number(double v) { return fmt::format("{}", v); }

}  // namespace

PipeNetwork parse_network(std::string_view text, std::string name) {
  auto sections = tokenize(text);

  for (const char* unsupported : {"TANKS", "PUMPS", "VALVES"}) {
    if (auto it = sections.find(unsupported); it != sections.end() && !it->second.empty()) {
      throw ParseError(Kind::kUnsupported, it->second.front().line,
                       fmt::format("[{}] is not supported", unsupported));
    }
  }

  if (name.empty()) {
    if (auto it = sections.find("TITLE"); it != sections.end() && !it->second.empty()) {
      name = it->second.front().tokens.front();
    }
  }

  UnitSystem units = UnitSystem::from_flow_units("GPM");  // EPANET default
  if (auto it = sections.find("OPTIONS"); it != sections.end()) {
    for (const Row& row : it->second) {
      const std::string key = upper(row.tokens.front());
      if (key == "UNITS") {
        require_columns(row, 2, "OPTIONS");
        try {
          units = UnitSystem::from_flow_units(row.tokens[1]);
        } catch (const Error& e) {
          throw ParseError(Kind::kUnsupported, row.line, e.what());
        }
      } else if (key == "HEADLOSS") {
        require_columns(row, 2, "OPTIONS");
        if (upper(row.tokens[1]) != "H-W") {
          throw ParseError(Kind::kUnsupported, row.line, "only Hazen-Williams head loss is supported");
        }
      }
    }
  }

  const auto design_it = sections.find("DESIGN");
  if (design_it == sections.end()) throw ParseError(Kind::kMissingDesign, 0, "missing [DESIGN] section");
  DesignSection design = read_design(design_it->second);

  std::vector<Node> nodes;
  std::unordered_map<std::string, std::size_t> node_index;
  auto add_node = [&](Node node, std::size_t line) {
    if (node_index.contains(node.id)) {
      throw ParseError(Kind::kDuplicateId, line, "duplicate node id '" + node.id + "'");
    }
    node_index.emplace(node.id, nodes.size());
    nodes.push_back(std::move(node));
  };
  for (const Row& row : sections["JUNCTIONS"]) {
    require_columns(row, 2, "JUNCTIONS");
    Node n;
    n.id = row.tokens[0];
    n.kind = NodeKind::kJunction;
    n.elevation = to_number(row.tokens[1], row.line) * units.length_to_m;
    n.demand = row.tokens.size() > 2 ? to_number(row.tokens[2], row.line) * units.flow_to_m3s : 0.0;
    if (n.demand < 0.0) throw ParseError(Kind::kSyntax, row.line, "negative demand");
    add_node(std::move(n), row.line);
  }
  for (const Row& row : sections["RESERVOIRS"]) {
    require_columns(row, 2, "RESERVOIRS");
    Node n;
    n.id = row.tokens[0];
    n.kind = NodeKind::kReservoir;
    n.head = to_number(row.tokens[1], row.line) * units.length_to_m;
    n.elevation = n.head;
    add_node(std::move(n), row.line);
  }

  std::vector<Pipe> pipes;
  std::vector<double> native_diameter;
  std::unordered_map<std::string, std::size_t> pipe_index;
  for (const Row& row : sections["PIPES"]) {
    require_columns(row, 6, "PIPES");
    Pipe p;
    p.id = row.tokens[0];
    if (pipe_index.contains(p.id)) {
      throw ParseError(Kind::kDuplicateId, row.line, "duplicate pipe id '" + p.id + "'");
    }
    for (int end = 0; end < 2; ++end) {
      const std::string& ref = row.tokens[1 + end];
      auto it = node_index.find(ref);
      if (it == node_index.end()) {
        throw ParseError(Kind::kUnknownNode, row.line,
                         fmt::format("pipe '{}' references undeclared node '{}'", p.id, ref));
      }
      (end == 0 ? p.from : p.to) = it->second;
    }
    if (p.from == p.to) throw ParseError(Kind::kSyntax, row.line, "pipe '" + p.id + "' is a self loop");
    p.length = to_number(row.tokens[3], row.line) * units.length_to_m;
    const double diameter = to_number(row.tokens[4], row.line);
    p.roughness = to_number(row.tokens[5], row.line);
    if (!(p.length > 0.0) || !(diameter > 0.0) || !(p.roughness > 0.0)) {
      throw ParseError(Kind::kSyntax, row.line, "length, diameter and roughness must be positive");
    }
    if (row.tokens.size() > 7 && upper(row.tokens[7]) != "OPEN") {
      throw ParseError(Kind::kUnsupported, row.line, "only open pipes are supported");
    }
    p.existing_diameter = diameter * units.diameter_to_m;
    pipe_index.emplace(p.id, pipes.size());
    pipes.push_back(std::move(p));
  }

  // Decision pipes.
  std::vector<std::size_t> decision;
  if (design.decision_all) {
    for (std::size_t i = 0; i < pipes.size(); ++i) decision.push_back(i);
  } else {
    for (const auto& [id, line] : *design.decision) {
      auto it = pipe_index.find(id);
      if (it == pipe_index.end()) {
        throw ParseError(Kind::kUnknownPipe, line, "decision references unknown pipe '" + id + "'");
      }
      if (std::find(decision.begin(), decision.end(), it->second) != decision.end()) {
        throw ParseError(Kind::kDuplicateId, line, "pipe '" + id + "' listed twice as a decision");
      }
      decision.push_back(it->second);
    }
  }
  for (std::size_t k = 0; k < decision.size(); ++k) {
    Pipe& p = pipes[decision[k]];
    p.decision_index = k;
    if (!design.duplicate) p.existing_diameter.reset();
  }

  // Head floors.
  for (const auto& rule : design.head_rules) {
    auto apply = [&](Node& n) {
      n.min_head = rule.value * units.length_to_m + (rule.pressure ? n.elevation : 0.0);
    };
    if (rule.node == "*") {
      for (Node& n : nodes) {
        if (!n.is_reservoir()) apply(n);
      }
      continue;
    }
    auto it = node_index.find(rule.node);
    if (it == node_index.end()) {
      throw ParseError(Kind::kUnknownNode, rule.line, "minimum head for undeclared node '" + rule.node + "'");
    }
    if (nodes[it->second].is_reservoir()) {
      throw ParseError(Kind::kSyntax, rule.line, "reservoir '" + rule.node + "' cannot take a minimum head");
    }
    apply(nodes[it->second]);
  }

  std::vector<double> sizes;
  sizes.reserve(design.diameters.size());
  for (double d : design.diameters) sizes.push_back(d * units.diameter_to_m);

  try {
    DiameterTable table = design.power_law
                              ? DiameterTable::power_law(std::move(sizes), design.coefficient,
                                                         design.exponent, design.diameter_unit)
                              : DiameterTable::tabulated(std::move(sizes), std::move(design.unit_costs));
    return PipeNetwork(std::move(name), std::move(nodes), std::move(pipes), std::move(table), units,
                       design.settings);
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(Kind::kSyntax, design.diameters_line, e.what());
  }
}

PipeNetwork parse_network_with_design(std::string_view inp_text, std::string_view design_text,
                                      std::string name) {
  std::string combined(inp_text);
  combined += "\n";
  combined += design_text;
  return parse_network(combined, std::move(name));
}

std::string serialize_network(const PipeNetwork& net) {
  const UnitSystem& u = net.units();
  std::ostringstream out;
  out << "[TITLE]\n" << (net.name().empty() ? "network" : net.name()) << "\n\n";
  out << "[OPTIONS]\nUnits     " << u.flow_units << "\nHeadloss  H-W\n\n";

  out << "[JUNCTIONS]\n;ID Elev Demand\n";
  for (const Node& n : net.nodes()) {
    if (n.is_reservoir()) continue;
    out << n.id << ' ' << format_number(n.elevation / u.length_to_m) << ' '
        << format_number(n.demand / u.flow_to_m3s) << '\n';
  }
  out << "\n[RESERVOIRS]\n;ID Head\n";
  for (const Node& n : net.nodes()) {
    if (n.is_reservoir()) out << n.id << ' ' << format_number(n.head / u.length_to_m) << '\n';
  }

  const DiameterTable& table = net.diameter_table();
  std::size_t with_existing = 0;
  for (std::size_t k = 0; k < net.decision_count(); ++k) {
    if (net.pipe(net.decision_pipe(k)).existing_diameter) ++with_existing;
  }
  const bool duplicate = net.decision_count() > 0 && with_existing == net.decision_count();
  if (with_existing != 0 && !duplicate) {
    throw StructuralError("cannot serialize a mix of duplicated and replaced decision pipes");
  }

  out << "\n[PIPES]\n;ID Node1 Node2 Length Diameter Roughness\n";
  for (const Pipe& p : net.pipes()) {
    const double d = p.existing_diameter ? *p.existing_diameter : table.max();
    out << p.id << ' ' << net.node(p.from).id << ' ' << net.node(p.to).id << ' '
        << format_number(p.length / u.length_to_m) << ' ' << format_number(d / u.diameter_to_m) << ' '
        << format_number(p.roughness) << '\n';
  }

  out << "\n[DESIGN]\nMode " << (duplicate ? "DUPLICATE" : "REPLACE") << "\nDecision";
  bool all_in_order = net.decision_count() == net.pipe_count();
  for (std::size_t k = 0; all_in_order && k < net.decision_count(); ++k) {
    all_in_order = net.decision_pipe(k) == k;
  }
  if (all_in_order) {
    out << " ALL";
  } else {
    for (std::size_t k = 0; k < net.decision_count(); ++k) out << ' ' << net.pipe(net.decision_pipe(k)).id;
  }
  out << "\nDiameters";
  for (double d : table.sizes()) out << ' ' << format_number(d / u.diameter_to_m);
  if (table.cost_model() == DiameterTable::CostModel::kPowerLaw) {
    const double unit = table.diameter_unit();
    const char* unit_name = unit == kMetresPerInch ? "IN" : unit == 0.001 ? "MM" : "M";
    if (unit != kMetresPerInch && unit != 0.001 && unit != 1.0) {
      throw StructuralError("power-law diameter unit must be in, mm or m");
    }
    out << "\nCostModel POWER " << format_number(table.coefficient()) << ' '
        << format_number(table.exponent()) << ' ' << unit_name;
  } else {
    out << "\nUnitCosts";
    for (std::size_t k = 0; k < table.size(); ++k) out << ' ' << format_number(table.unit_cost_at(k));
    out << "\nCostModel TABLE";
  }
  out << '\n';
  for (const Node& n : net.nodes()) {
    if (n.min_head) out << "MinHead " << n.id << ' ' << format_number(*n.min_head / u.length_to_m) << '\n';
  }
  const DesignSettings& s = net.settings();
  out << "PressurePenalty " << format_number(s.pressure_penalty) << '\n';
  out << "DiameterPenalty " << format_number(s.diameter_penalty) << '\n';
  out << "NytpSpecial " << (s.nytp_special ? "YES" : "NO") << '\n';
  if (s.phi) out << "Phi " << format_number(*s.phi) << '\n';
  if (s.target_cost) out << "Target " << format_number(*s.target_cost) << '\n';
  out << "\n[END]\n";
  return out.str();
}

PipeNetwork replicate_network(const PipeNetwork& net, std::size_t k) {
  if (k == 0) throw PreconditionError("replication count must be positive");
  if (net.reservoir_count() != 1) {
    throw PreconditionError("replication needs exactly one reservoir");
  }
  std::size_t reservoir = 0;
  for (std::size_t i = 0; i < net.node_count(); ++i) {
    if (net.node(i).is_reservoir()) reservoir = i;
  }

  // Junction copies first and the shared reservoir last, the order parse_network
  // produces, so a replicated network survives a serialize/parse round trip.
  const std::size_t shared = k * (net.node_count() - 1);
  std::vector<Node> nodes;
  nodes.reserve(shared + 1);
  std::vector<Pipe> pipes;
  pipes.reserve(k * net.pipe_count());
  const std::size_t n_decision = net.decision_count();
  std::vector<std::size_t> map(net.node_count());

  for (std::size_t copy = 1; copy <= k; ++copy) {
    const std::string suffix = "_" + std::to_string(copy);
    for (std::size_t i = 0; i < net.node_count(); ++i) {
      if (i == reservoir) {
        map[i] = shared;
        continue;
      }
      Node n = net.node(i);
      n.id += suffix;
      map[i] = nodes.size();
      nodes.push_back(std::move(n));
    }
    for (const Pipe& original : net.pipes()) {
      Pipe p = original;
      p.id += suffix;
      p.from = map[original.from];
      p.to = map[original.to];
      if (p.decision_index) *p.decision_index += (copy - 1) * n_decision;
      pipes.push_back(std::move(p));
    }
  }

  nodes.push_back(net.node(reservoir));

  DesignSettings settings = net.settings();
  const double scale = static_cast<double>(k);
  if (settings.phi) *settings.phi *= scale;
  if (settings.target_cost) *settings.target_cost *= scale;
  std::string name = k == 1 ? net.name() : net.name() + "x" + std::to_string(k);
  return PipeNetwork(std::move(name), std::move(nodes), std::move(pipes), net.diameter_table(),
                     net.units(), settings);
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

PipeNetwork load_network_file(const std::filesystem::path& path) {
  return parse_network(read_file(path), {});
}

PipeNetwork load_network_file(const std::filesystem::path& inp_path,
                              const std::filesystem::path& design_path) {
  return parse_network_with_design(read_file(inp_path), read_file(design_path), {});
}

std::string_view bundled_fixture_text(std::string_view name) {
  const std::string key = upper(name);
  if (key == "NYTP") return fixtures::kNytp;
  if (key == "HANOI") return fixtures::kHanoi;
  throw Error("no bundled fixture named '" + std::string(name) + "'");
}

std::vector<std::string> bundled_network_names() { return {"nytp", "nytp2", "nytp50", "hanoi"}; }

PipeNetwork bundled_network(std::string_view name) {
  const std::string key = upper(name);
  if (key == "NYTP") return parse_network(fixtures::kNytp, "nytp");
  if (key == "NYTP2") return replicate_network(bundled_network("nytp"), 2);
  if (key == "NYTP50" || key == "50NYTP") return replicate_network(bundled_network("nytp"), 50);
  if (key == "HANOI" || key == "HP") return parse_network(fixtures::kHanoi, "hanoi");
  throw Error("no bundled network named '" + std::string(name) + "'");
}

PipeNetwork resolve_network(std::string_view name_or_path) {
  for (const auto& known : bundled_network_names()) {
    if (upper(known) == upper(name_or_path)) return bundled_network(name_or_path);
  }
  if (upper(name_or_path) == "50NYTP" || upper(name_or_path) == "HP") return bundled_network(name_or_path);
  return load_network_file(std::filesystem::path(std::string(name_or_path)));
}

double parse_diameter(std::string_view text, const UnitSystem& units) {
  std::string s(text);
  double scale = units.diameter_to_m;
  auto strip = [&](std::string_view suffix, double factor) {
    if (s.size() > suffix.size() && s.ends_with(suffix)) {
      s.resize(s.size() - suffix.size());
      scale = factor;
      return true;
    }
    return false;
  };
  strip("mm", 0.001) || strip("in", kMetresPerInch) || strip("m", 1.0);
  return to_number(s, 0) * scale;
}

DesignVector parse_design(std::string_view text, const PipeNetwork& network) {
  DesignVector design;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto c = line.find_first_of("#;"); c != std::string::npos) line.resize(c);
    auto tokens = split(line);
    if (tokens.empty()) continue;
    if (tokens.size() != 1) throw ParseError(Kind::kSyntax, line_no, "one diameter per line expected");
    try {
      design.diameters.push_back(parse_diameter(tokens[0], network.units()));
    } catch (const ParseError&) {
      throw ParseError(Kind::kBadNumber, line_no, "'" + tokens[0] + "' is not a diameter");
    }
  }
  design.flavor = is_commercial(design.diameters, network.diameter_table()) ? DesignFlavor::kCommercial
                                                                            : DesignFlavor::kContinuous;
  if (design.flavor == DesignFlavor::kCommercial) {
    // Snap to the stored sizes so later equality tests are exact.
    for (double& d : design.diameters) d = network.diameter_table().sizes()[*network.diameter_table().index_of(d)];
  }
  validate_design(network, design);
  return design;
}

DesignVector load_design_file(const std::filesystem::path& path, const PipeNetwork& network) {
  return parse_design(read_file(path), network);
}

std::string format_design(const DesignVector& design, const PipeNetwork& network) {
  std::string out;
  for (double d : design.diameters) {
    out += fmt::format("{}\n", d / network.units().diameter_to_m);
  }
  return out;
}

}  // namespace pipesizer
