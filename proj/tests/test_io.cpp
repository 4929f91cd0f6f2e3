#include "test_support.hpp"

#include "povm_entangle/io/counts_file.hpp"
#include "povm_entangle/io/json.hpp"
#include "povm_entangle/io/svg.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace povm;
namespace fs = std::filesystem;

namespace {

CoincidenceCounts sample_counts() {
  DetectorModel model;
  model.counts_per_setting = 500;
  model.eps = 0.1;
  return draw_counts(model, 3);
}

std::string csv_error(const std::string& text) {
  try {
    io::parse_counts_csv(text, "in.csv");
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

/// Drops every row of the given pair from a formatted CSV.
std::string without_pair(const std::string& csv, const std::string& prefix) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line))
    if (line.rfind(prefix, 0) != 0) out += line + "\n";
  return out;
}

template <class T>
void expect_byte_identical_round_trip(const T& value) {
  const std::string first = io::dump(json(value));
  const T back = json::parse(first).get<T>();
  EXPECT_EQ(io::dump(json(back)), first);
}

std::size_t occurrences(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST(CountsCsv, RoundTrip) {
  const auto counts = sample_counts();
  const std::string csv = io::format_counts_csv(counts);
  const auto back = io::parse_counts_csv(csv);
  EXPECT_EQ(back.outcomes(), counts.outcomes());
  EXPECT_EQ(back.raw(), counts.raw());
  EXPECT_EQ(io::format_counts_csv(back), csv);
}

TEST(CountsCsv, CommentsCaseAndOrder) {
  const auto counts = sample_counts();
  std::string csv = io::format_counts_csv(counts);
  csv = "# manifest {}\n\n" + csv;
  const auto back = io::parse_counts_csv(csv);
  EXPECT_EQ(back.raw(), counts.raw());
  std::string lower = "PROBE_A,Probe_B,outcome,COUNT\n";
  for (int pair = kProbePairs - 1; pair >= 0; --pair)
    for (const char* o : {"x", "y"}) {
      lower += std::string(1, static_cast<char>(std::tolower(kPolarizationNames[pair / 6]))) + "," +
               kPolarizationNames[pair % 6] + "," + o + ",1\n";
    }
  const auto reordered = io::parse_counts_csv(lower);
  // outcome labels are case-insensitive and stored upper case
  EXPECT_EQ(reordered.outcomes(), (std::vector<std::string>{"X", "Y"}));
}

TEST(CountsCsv, Diagnostics) {
  const std::string csv = io::format_counts_csv(sample_counts());
  EXPECT_NE(csv_error("").find("in.csv: empty counts file"), std::string::npos);
  EXPECT_NE(csv_error("a,b,c\n").find("in.csv:1: expected header"), std::string::npos);
  EXPECT_NE(csv_error("probe_a,probe_b,outcome,count\nH,Q,AA,3\n").find("in.csv:2: field probe_b"),
            std::string::npos);
  EXPECT_NE(csv_error("probe_a,probe_b,outcome,count\nH,H,AA,-3\n").find("in.csv:2: field count"),
            std::string::npos);
  EXPECT_NE(csv_error("probe_a,probe_b,outcome,count\nH,H,AA,3.5\n").find("in.csv:2: field count"),
            std::string::npos);
  EXPECT_NE(csv_error("probe_a,probe_b,outcome,count\nH,H,AA\n").find("in.csv:2: expected 4 fields"),
            std::string::npos);
  const std::string dup = csv + "H,H,AA,1\n";
  EXPECT_NE(csv_error(dup).find("in.csv:146"), std::string::npos) << csv_error(dup);
  const std::string missing = csv_error(without_pair(csv, "D,R,"));
  EXPECT_NE(missing.find("D,R"), std::string::npos) << missing;
}

TEST(CountsJson, RoundTripAndOverride) {
  const auto counts = sample_counts();
  const json j = io::counts_to_json(counts);
  const auto back = io::counts_from_json(json::parse(io::dump(j)));
  EXPECT_EQ(back.raw(), counts.raw());
  EXPECT_EQ(io::dump(io::counts_to_json(back)), io::dump(j));

  BasisMap swapped = BasisMap::standard();
  std::swap(swapped.alice, swapped.bob);
  EXPECT_NO_THROW(swapped.validate());
  const auto over = io::counts_from_json(j, "x", swapped);
  EXPECT_EQ(json(over.basis_map()), json(swapped));

  json bad = j;
  bad["counts"]["H,H"]["AA"] = 1.5;
  EXPECT_THROW(io::counts_from_json(bad), InputError);
  bad = j;
  bad["counts"].erase("V,L");
  EXPECT_THROW(io::counts_from_json(bad), InputError);
  EXPECT_THROW(io::counts_from_json(json::object()), InputError);
}

TEST(CountsFile, ExtensionSelectsFormat) {
  const fs::path dir = fs::temp_directory_path() / "povm_io_test";
  fs::create_directories(dir);
  const auto counts = sample_counts();
  for (const char* name : {"c.csv", "c.JSON"}) {
    const std::string path = (dir / name).string();
    io::write_counts(path, counts);
    EXPECT_EQ(io::read_counts(path).raw(), counts.raw());
  }
  EXPECT_EQ(io::read_text((dir / "c.JSON").string()).front(), '{');
  EXPECT_THROW(io::read_counts((dir / "absent.csv").string()), InputError);
  fs::remove_all(dir);
}

TEST(BasisMapJson, CaseAndValidation) {
  json j = BasisMap::standard();
  EXPECT_EQ(j["alice"]["H"], "z+");
  EXPECT_EQ(j["bob"]["D"], "z+");
  expect_byte_identical_round_trip(BasisMap::standard());
  json lower = j;
  lower["alice"].erase("H");
  lower["alice"]["h"] = "z+";
  EXPECT_EQ(json(lower.get<BasisMap>()), j);
  json repeated = lower;
  repeated["alice"]["H"] = "z+";
  EXPECT_THROW(repeated.get<BasisMap>(), InputError);
  json missing = j;
  missing["bob"].erase("L");
  EXPECT_THROW(missing.get<BasisMap>(), InputError);
  json noninjective = j;
  noninjective["bob"]["L"] = "y+";
  EXPECT_THROW(noninjective.get<BasisMap>(), InputError);
}

TEST(ResultJson, ByteIdenticalRoundTrips) {
  std::mt19937_64 rng(8);
  const auto sf = to_standard_form(oracle::to_op(oracle::random_element(rng)));
  expect_byte_identical_round_trip(sf);
  const auto q = optimal_quasidistribution(sf);
  expect_byte_identical_round_trip(q);
  expect_byte_identical_round_trip(negativity_report(q));
  expect_byte_identical_round_trip(negativity_report(q, QuasiGrid::Constant(0.01)));
  expect_byte_identical_round_trip(witness_evaluate(noisy_ghz_element(2, 0.1), ghz_probe(2)));
  expect_byte_identical_round_trip(bell_povm());
  const StandardForm back = json(sf).get<StandardForm>();
  EXPECT_EQ(back.pi, sf.pi);
  EXPECT_EQ(back.transform.filter_a, sf.transform.filter_a);
}

TEST(ResultJson, NonFiniteBecomesNull) {
  QuasiDistribution q;
  q.grid(0, 0) = -0.1;
  const json j = negativity_report(q, QuasiGrid::Constant(0.02));
  EXPECT_TRUE(j["significance"][1][1].is_null());
  EXPECT_DOUBLE_EQ(j["significance"][0][0].get<double>(), 5.0);
}

TEST(Svg, BarsAndErrorBars) {
  const auto q = ideal_bell_reference().at("0");
  const std::string plain = io::quasidistribution_svg("singlet <0>", q.grid);
  EXPECT_EQ(plain.rfind("<svg", 0), 0u);
  EXPECT_NE(plain.find("singlet &lt;0&gt;"), std::string::npos);
  EXPECT_EQ(occurrences(plain, "fill=\"#e45756\""), 6u);
  EXPECT_EQ(occurrences(plain, "fill=\"#4c78a8\""), 30u);
  EXPECT_EQ(occurrences(plain, "stroke=\"black\"/>"), 1u);  // the baseline only

  const std::string bars = io::quasidistribution_svg("t", q.grid, QuasiGrid::Constant(0.01));
  EXPECT_EQ(occurrences(bars, "stroke=\"black\"/>"), 37u);

  const auto sf = to_standard_form(bell_povm().at("0"));
  const auto t = back_transform(sf, q);
  const std::string listing = io::quasidistribution_svg("t", q.grid, std::nullopt, &t);
  EXPECT_NE(listing.find("Local states"), std::string::npos);
  EXPECT_EQ(occurrences(listing, "~ : ("), 12u);
}
