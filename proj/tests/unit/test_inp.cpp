#include <gtest/gtest.h>

#include <string>

#include "pipesizer/errors.hpp"
#include "pipesizer/inp.hpp"

namespace pipesizer {
namespace {

const char* kSmall = R"([TITLE]
tiny

[OPTIONS]
Units  CMS

[JUNCTIONS]
;ID  Elev  Demand
 A    5     0.02
 B    3     0.03

[RESERVOIRS]
 R    60

[PIPES]
;ID  N1  N2  Length  Diameter  Roughness
 1    R   A   500     300       120
 2    A   B   400     200       120
 3    R   B   800     250       120

[DESIGN]
Mode         REPLACE
Decision     ALL
Diameters    100 200 300 400
UnitCosts    10  30  60  100
MinPressure  *  20
)";

ParseError::Kind kind_of(const std::string& text) {
  try {
    parse_network(text);
  } catch (const ParseError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no parse error";
  return ParseError::Kind::kSyntax;
}

std::size_t line_of(const std::string& text) {
  try {
    parse_network(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
  text.replace(text.find(from), from.size(), to);
  return text;
}

TEST(Inp, ParsesSmallNetwork) {
  const PipeNetwork net = parse_network(kSmall);
  EXPECT_EQ(net.name(), "tiny");
  EXPECT_EQ(net.node_count(), 3u);
  EXPECT_EQ(net.decision_count(), 3u);
  const Node& a = net.node(*net.find_node("A"));
  EXPECT_DOUBLE_EQ(a.demand, 0.02);
  ASSERT_TRUE(a.min_head);
  EXPECT_DOUBLE_EQ(*a.min_head, 25.0);
  EXPECT_DOUBLE_EQ(net.diameter_table().max(), 0.4);
  // REPLACE mode: no existing tunnel survives.
  EXPECT_FALSE(net.pipe(0).existing_diameter.has_value());
}

TEST(Inp, UnknownNodeNamesTheNode) {
  const std::string bad = replace(kSmall, " 2    A   B ", " 2    A   Q ");
  try {
    parse_network(bad);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseError::Kind::kUnknownNode);
    EXPECT_EQ(e.line(), 18u);
    EXPECT_NE(std::string(e.what()).find("'Q'"), std::string::npos);
  }
}

TEST(Inp, DistinctErrorKinds) {
  EXPECT_EQ(kind_of(replace(kSmall, " B    3 ", " A    3 ")), ParseError::Kind::kDuplicateId);
  EXPECT_EQ(kind_of(replace(kSmall, "0.03", "0.0x3")), ParseError::Kind::kBadNumber);
  EXPECT_EQ(line_of(replace(kSmall, "0.03", "0.0x3")), 10u);
  EXPECT_EQ(kind_of(std::string(kSmall).substr(0, std::string(kSmall).find("[DESIGN]"))),
            ParseError::Kind::kMissingDesign);
  EXPECT_EQ(kind_of(std::string("junk\n") + kSmall), ParseError::Kind::kSyntax);
  EXPECT_EQ(kind_of(std::string(kSmall) + "[TANKS]\n T 1 2 3 4 5 6 7\n"), ParseError::Kind::kUnsupported);
  EXPECT_EQ(kind_of(replace(kSmall, "Decision     ALL", "Decision     1 9")), ParseError::Kind::kUnknownPipe);
  EXPECT_EQ(kind_of(replace(kSmall, "MinPressure  *  20", "MinPressure  Z  20")), ParseError::Kind::kUnknownNode);
}

TEST(Inp, RoundTrip) {
  for (const char* name : {"nytp", "hanoi"}) {
    const PipeNetwork net = bundled_network(name);
    EXPECT_EQ(parse_network(serialize_network(net)), net) << name;
  }
  const PipeNetwork tiny = parse_network(kSmall);
  EXPECT_EQ(parse_network(serialize_network(tiny)), tiny);
  const PipeNetwork twin = bundled_network("nytp2");
  EXPECT_EQ(parse_network(serialize_network(twin)), twin);
}

TEST(Inp, SidecarDesign) {
  const std::string text(kSmall);
  const auto cut = text.find("[DESIGN]");
  const PipeNetwork split = parse_network_with_design(text.substr(0, cut), text.substr(cut));
  EXPECT_EQ(split, parse_network(kSmall));
}

TEST(Inp, Replicate) {
  const PipeNetwork nytp = bundled_network("nytp");
  const PipeNetwork two = replicate_network(nytp, 2);
  EXPECT_EQ(two.decision_count(), 42u);
  EXPECT_EQ(two.reservoir_count(), 1u);
  EXPECT_EQ(two.node_count(), 39u);
  EXPECT_TRUE(two.find_pipe("7_2").has_value());
  EXPECT_EQ(two.decision_pipe(21 + 6), *two.find_pipe("7_2"));
  EXPECT_DOUBLE_EQ(*two.settings().target_cost, 2 * *nytp.settings().target_cost);
  EXPECT_DOUBLE_EQ(*two.settings().phi, 2 * *nytp.settings().phi);

  EXPECT_EQ(replicate_network(nytp, 50).decision_count(), 1050u);
  // k = 1 renames ids with a "_1" suffix and changes nothing else.
  const PipeNetwork one = replicate_network(nytp, 1);
  ASSERT_EQ(one.node_count(), nytp.node_count());
  ASSERT_EQ(one.pipe_count(), nytp.pipe_count());
  for (std::size_t i = 0; i < nytp.node_count(); ++i) {
    Node n = nytp.node(i);
    if (!n.is_reservoir()) n.id += "_1";
    EXPECT_EQ(one.node(i), n) << i;
  }
  for (std::size_t i = 0; i < nytp.pipe_count(); ++i) {
    Pipe p = nytp.pipe(i);
    p.id += "_1";
    EXPECT_EQ(one.pipe(i), p) << i;
  }
  EXPECT_EQ(one.diameter_table(), nytp.diameter_table());
  EXPECT_EQ(one.settings(), nytp.settings());
  EXPECT_THROW(replicate_network(nytp, 0), PreconditionError);

  const std::string twin_reservoir = replace(kSmall, " R    60\n", " R    60\n S    55\n");
  EXPECT_THROW(replicate_network(parse_network(replace(twin_reservoir, "R   B", "S   B")), 2), PreconditionError);
}

TEST(Inp, Designs) {
  const PipeNetwork hanoi = bundled_network("hanoi");
  std::string text = "# all 12 inch\n";
  for (int i = 0; i < 34; ++i) text += i % 2 ? "12in\n" : "304.8 ; bare numbers are mm\n";
  const DesignVector d = parse_design(text, hanoi);
  EXPECT_EQ(d.flavor, DesignFlavor::kCommercial);
  for (double v : d.diameters) EXPECT_DOUBLE_EQ(v, 0.3048);
  EXPECT_EQ(parse_design(format_design(d, hanoi), hanoi), d);

  EXPECT_THROW(parse_design("304.8\n", hanoi), StructuralError);
  EXPECT_THROW(parse_design("abc\n", hanoi), ParseError);
  EXPECT_NEAR(parse_diameter("12in", UnitSystem::si()), 0.3048, 1e-15);
  EXPECT_NEAR(parse_diameter("0.5m", UnitSystem::si()), 0.5, 1e-15);
  EXPECT_NEAR(parse_diameter("36", bundled_network("nytp").units()), 0.9144, 1e-15);
}

TEST(Inp, BundledNames) {
  EXPECT_EQ(bundled_network("NYTP"), bundled_network("nytp"));
  EXPECT_EQ(bundled_network("50nytp").decision_count(), 1050u);
  EXPECT_EQ(bundled_network("hp"), bundled_network("hanoi"));
  EXPECT_THROW(bundled_network("balerma"), Error);
}

}  // namespace
}  // namespace pipesizer
