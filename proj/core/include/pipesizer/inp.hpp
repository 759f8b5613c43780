#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pipesizer/network.hpp"

namespace pipesizer {

// Reads the EPANET INP subset ([OPTIONS] Units, [JUNCTIONS], [RESERVOIRS],
// [PIPES]) plus the [DESIGN] extension section:
//
//   [DESIGN]
//   Mode            DUPLICATE | REPLACE
//   Decision        ALL | <pipe id> ...
//   Diameters       <size> ...          ; native diameter unit, ascending
//   UnitCosts       <cost> ...          ; per native length unit
//   CostModel       TABLE | POWER <coefficient> <exponent> IN|MM|M
//   MinHead         * | <node id>  <total head>
//   MinPressure     * | <node id>  <pressure head above elevation>
//   PressurePenalty <currency per head unit>
//   DiameterPenalty <currency>
//   NytpSpecial     YES | NO
//   Phi             <currency>
//   Target          <currency>
//
// Values are converted to SI on the way in. Throws ParseError.
PipeNetwork parse_network(std::string_view text, std::string name = {});

// Network file plus a sidecar holding only the [DESIGN] section.
PipeNetwork parse_network_with_design(std::string_view inp_text, std::string_view design_text,
                                      std::string name = {});

// Inverse of parse_network in the network's native units.
std::string serialize_network(const PipeNetwork& network);

// k hydraulically independent copies fed by the single shared reservoir.
// Copy c (1-based) has its ids suffixed "_c"; decision k·N + i is pipe i of
// copy k. The phi and target settings scale with k.
PipeNetwork replicate_network(const PipeNetwork& network, std::size_t k);

PipeNetwork load_network_file(const std::filesystem::path& path);
PipeNetwork load_network_file(const std::filesystem::path& inp_path,
                              const std::filesystem::path& design_path);

// nytp, nytp2, nytp50, hanoi. Replicated variants are built on load.
PipeNetwork bundled_network(std::string_view name);
std::vector<std::string> bundled_network_names();

// Bundled name or path to a file.
PipeNetwork resolve_network(std::string_view name_or_path);

// Source text of a bundled fixture (nytp, hanoi).
std::string_view bundled_fixture_text(std::string_view name);

// Plain-text design file: one diameter per line, bare numbers in the native
// diameter unit or suffixed with in / mm / m. '#' and ';' start comments.
DesignVector parse_design(std::string_view text, const PipeNetwork& network);
DesignVector load_design_file(const std::filesystem::path& path, const PipeNetwork& network);
std::string format_design(const DesignVector& design, const PipeNetwork& network);

// "304.8mm", "12in", "0.3048m" or a bare native-unit number, returned in metres.
double parse_diameter(std::string_view text, const UnitSystem& units);

}  // namespace pipesizer
