#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "sparselut/errors.hpp"
#include "sparselut/lut/rtl.hpp"
#include "sparselut/lut/table_io.hpp"
#include "sparselut/lut/truth_table.hpp"
#include "sparselut/model/lut_network.hpp"
#include "verilog_sim.hpp"

using namespace sparselut;

namespace {

TrainedModel make_model(int input_dim, const std::vector<int>& widths, int fanin, int bits, int degree,
                        std::uint64_t seed) {
  ModelConfig cfg = ModelConfig::uniform(input_dim, widths, fanin, bits, degree);
  Rng rng(seed);
  FeatureMask mask;
  for (const auto& l : cfg.layers) mask.layers.push_back(init_random_mask(l.n_in, l.n_out, l.fanin, rng));
  TrainedModel m = TrainedModel::initialize(cfg, mask, rng);
  for (auto& l : m.layers) {
    l.coeffs *= 2.0;
    for (Eigen::Index j = 0; j < l.bias.size(); ++j) l.bias(j) = 0.5 + 0.3 * rng.normal();
  }
  return m;
}

std::vector<std::pair<std::string, std::string>> as_sources(const std::vector<RtlFile>& files) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : files) out.emplace_back(f.name, f.text);
  return out;
}

}  // namespace

TEST(LutCost, Examples) {
  EXPECT_EQ(lut_cost(2, 6), 4096u);
  EXPECT_EQ(lut_cost(3, 4), 4096u);
  EXPECT_EQ(lut_cost(1, 1), 2u);
  EXPECT_EQ(lut_cost(1, 63), std::uint64_t{1} << 63);
  EXPECT_THROW(lut_cost(8, 8), CapacityExceeded);
  EXPECT_THROW(lut_cost(0, 4), std::invalid_argument);
  EXPECT_THROW(lut_cost(2, 0), std::invalid_argument);
}

TEST(LutCost, GrowsExponentiallyInBitsTimesFanin) {
  for (int b = 1; b <= 4; ++b) {
    for (int f = 1; f <= 6; ++f) EXPECT_EQ(lut_cost(b, f) * lut_cost(b, 1), lut_cost(b, f + 1));
  }
}

TEST(FieldCode, FirstInputIsMostSignificant) {
  // fan-in 3, 2 bits: address = c0 << 4 | c1 << 2 | c2
  EXPECT_EQ(field_code(0b110100, 0, 3, 2), 3u);
  EXPECT_EQ(field_code(0b110100, 1, 3, 2), 1u);
  EXPECT_EQ(field_code(0b110100, 2, 3, 2), 0u);
}

TEST(TruthTable, RowCountMatchesCost) {
  for (int f = 1; f <= 4; ++f) {
    const TrainedModel m = make_model(8, {3}, f, 2, 1, 10 + static_cast<std::uint64_t>(f));
    const TruthTable t = enumerate_truth_table(neuron_view(m, 0, 1));
    EXPECT_EQ(t.rows.size(), lut_cost(2, f));
    EXPECT_EQ(t.fanin(), f);
  }
}

TEST(TruthTable, ZeroWeightsGiveCodeZero) {
  TrainedModel m = make_model(6, {2}, 3, 2, 2, 3);
  m.layers[0].coeffs.setZero();
  m.layers[0].bias.setZero();
  const TruthTable t = enumerate_truth_table(neuron_view(m, 0, 0));
  for (auto c : t.rows) EXPECT_EQ(c, 0u);
}

TEST(TruthTable, MatchesReferenceRowByRow) {
  for (int degree = 1; degree <= 2; ++degree) {
    const TrainedModel m = make_model(10, {4, 3}, 4, 2, degree, 20 + static_cast<std::uint64_t>(degree));
    for (int l = 0; l < 2; ++l) {
      for (int j = 0; j < m.layers[static_cast<std::size_t>(l)].spec.n_out; ++j) {
        const NeuronView v = neuron_view(m, l, j);
        const TruthTable t = enumerate_truth_table(v);
        for (std::size_t r = 0; r < t.rows.size(); ++r) ASSERT_EQ(t.rows[r], sltest::ref_table_row(v, r)) << r;
      }
    }
  }
}

TEST(TruthTable, RefusesWideAddresses) {
  const TrainedModel m = make_model(30, {2}, 13, 2, 1, 4);
  EXPECT_THROW(enumerate_truth_table(neuron_view(m, 0, 0)), CapacityExceeded);
  const TrainedModel ok = make_model(30, {1}, 12, 2, 1, 4);
  EXPECT_EQ(enumerate_truth_table(neuron_view(ok, 0, 0)).rows.size(), std::size_t{1} << 24);
}

TEST(Verify, PassesOnFreshTable) {
  const TrainedModel m = make_model(12, {5}, 4, 3, 2, 5);
  for (int j = 0; j < 5; ++j) {
    const NeuronView v = neuron_view(m, 0, j);
    EXPECT_TRUE(verify_table(enumerate_truth_table(v), v).pass);
  }
}

TEST(Verify, ReportsInjectedFault) {
  const TrainedModel m = make_model(12, {5}, 4, 2, 1, 6);
  const NeuronView v = neuron_view(m, 0, 2);
  TruthTable t = enumerate_truth_table(v);
  for (std::size_t row : {std::size_t{0}, std::size_t{77}, t.rows.size() - 1}) {
    TruthTable bad = t;
    bad.rows[row] ^= 1u;
    const VerifyResult r = verify_table(bad, v);
    EXPECT_FALSE(r.pass);
    ASSERT_TRUE(r.first_mismatch.has_value());
    EXPECT_EQ(*r.first_mismatch, row);
    EXPECT_EQ(r.actual, bad.rows[row]);
    EXPECT_EQ(r.expected, t.rows[row]);
  }
}

TEST(CompileModel, FlagsTablesVerified) {
  const TrainedModel m = make_model(12, {6, 3}, 3, 2, 1, 7);
  const CompiledModel c = compile_model(m);
  ASSERT_EQ(c.tables.size(), 9u);
  for (const auto& t : c.tables) EXPECT_TRUE(t.verified);
  EXPECT_EQ(c.total_entries(), 9u * 64u);
  EXPECT_EQ(c.netlist.pipeline_depth(), 2);
}

TEST(TableIo, RoundTrip) {
  const TrainedModel m = make_model(12, {4}, 3, 3, 2, 8);
  const TruthTable t = enumerate_truth_table(neuron_view(m, 0, 3));
  std::stringstream s;
  write_truth_table(t, s);
  EXPECT_EQ(read_truth_table(s), t);
}

TEST(TableIo, HeaderAndRowFormat) {
  TruthTable t;
  t.layer = 1;
  t.neuron = 2;
  t.in_bits = 2;
  t.out_bits = 2;
  t.inputs = {4};
  t.rows = {0, 1, 3, 2};
  std::stringstream s;
  write_truth_table(t, s);
  EXPECT_EQ(s.str(), "LUTTBL v1 neuron=1.2 beta=2 fanin=1 inputs=4\n0 0\n1 1\n2 3\n3 2\n");
}

TEST(TableIo, RejectsMalformedInput) {
  const auto bad = [](const std::string& text) {
    std::istringstream in(text);
    return read_truth_table(in);
  };
  EXPECT_THROW(bad(""), FormatError);
  EXPECT_THROW(bad("LUTTBL v2 neuron=0.0 beta=1 fanin=1 inputs=0\n0 0\n1 1\n"), FormatError);
  EXPECT_THROW(bad("LUTTBL v1 neuron=0.0 beta=1 fanin=1 inputs=0\n0 0\n"), FormatError);
  EXPECT_THROW(bad("LUTTBL v1 neuron=0.0 beta=1 fanin=1 inputs=0\n1 0\n0 1\n"), FormatError);
  EXPECT_THROW(bad("LUTTBL v1 neuron=0.0 beta=1 fanin=1 inputs=0\n0 0\n1 2\n"), FormatError);
  try {
    bad("LUTTBL v1 neuron=0.0 beta=1 fanin=1 inputs=0\n0 0\n1 zz\n");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Rtl, SingleNeuronOneBitHasTwoEntries) {
  TrainedModel m = make_model(1, {1}, 1, 1, 1, 9);
  m.layers[0].coeffs << 0.0, 1.0;
  m.layers[0].bias(0) = 0.0;
  const CompiledModel c = compile_model(m);
  ASSERT_EQ(c.tables.size(), 1u);
  EXPECT_EQ(c.tables[0].rows, (std::vector<std::uint32_t>{0, 1}));
  const auto files = emit_rtl(c.netlist, c.tables);
  std::string all;
  for (const auto& f : files) all += f.text;
  EXPECT_NE(all.find("1'h0: code = 1'h0;"), std::string::npos);
  EXPECT_NE(all.find("1'h1: code = 1'h1;"), std::string::npos);
  EXPECT_EQ(all.find("1'h2"), std::string::npos);
}

TEST(Rtl, TextIsDeterministic) {
  const TrainedModel m = make_model(12, {6, 3}, 3, 2, 2, 10);
  const CompiledModel a = compile_model(m);
  const CompiledModel b = compile_model(m);
  const auto fa = emit_rtl(a.netlist, a.tables);
  const auto fb = emit_rtl(b.netlist, b.tables);
  ASSERT_EQ(fa.size(), fb.size());
  for (std::size_t i = 0; i < fa.size(); ++i) {
    EXPECT_EQ(fa[i].name, fb[i].name);
    EXPECT_EQ(fa[i].text, fb[i].text);
  }
}

TEST(Rtl, RejectsUnverifiedTables) {
  const TrainedModel m = make_model(8, {3}, 2, 2, 1, 11);
  CompiledModel c = compile_model(m);
  c.tables[1].verified = false;
  EXPECT_THROW(emit_rtl(c.netlist, c.tables), InvalidState);
}

TEST(Rtl, RejectsInconsistentNetlist) {
  const TrainedModel m = make_model(8, {3, 2}, 2, 2, 1, 12);
  CompiledModel c = compile_model(m);
  c.netlist.layers[1].n_in = 4;
  EXPECT_THROW(emit_rtl(c.netlist, c.tables), InvalidState);
}

TEST(Rtl, CosimulationMatchesSoftwareInference) {
  for (int degree = 1; degree <= 2; ++degree) {
    const TrainedModel m = make_model(16, {10, 6, 4}, 4, 2, degree, 13 + static_cast<std::uint64_t>(degree));
    const CompiledModel c = compile_model(m);
    const auto files = emit_rtl(c.netlist, c.tables);
    const sltest::Design design = sltest::Design::parse(as_sources(files));
    ASSERT_TRUE(design.has("sparselut_top"));
    sltest::Simulator sim(design, "sparselut_top");
    const int depth = c.netlist.pipeline_depth();
    EXPECT_EQ(depth, 3);
    Rng rng(99);
    for (int v = 0; v < 100; ++v) {
      std::vector<std::uint32_t> codes(16);
      sltest::Bits in(32, 0);
      for (int i = 0; i < 16; ++i) {
        codes[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(rng.uniform_index(4));
        sltest::u64_to_bits(in, 2 * i, 2, codes[static_cast<std::size_t>(i)]);
      }
      sim.set_input("in_bus", in);
      for (int k = 0; k < depth; ++k) sim.clock();
      const sltest::Bits out = sim.output("out_bus");
      const auto expected = m.infer_codes_from_codes(codes);
      ASSERT_EQ(expected, sltest::ref_infer_codes(m, codes));
      for (int j = 0; j < 4; ++j) {
        EXPECT_EQ(sltest::bits_to_u64(out, 2 * j, 2), expected[static_cast<std::size_t>(j)])
            << "vector " << v << " output " << j;
      }
    }
  }
}

TEST(Rtl, OutputNeedsFullPipelineDepth) {
  const TrainedModel m = make_model(8, {4, 3}, 2, 2, 1, 15);
  const CompiledModel c = compile_model(m);
  const sltest::Design design = sltest::Design::parse(as_sources(emit_rtl(c.netlist, c.tables)));
  sltest::Simulator sim(design, "sparselut_top");
  // find an input whose result differs from the all-zero input's result
  Rng rng(1);
  const std::vector<std::uint32_t> zero(8, 0);
  sltest::Bits zbits(16, 0);
  sim.set_input("in_bus", zbits);
  sim.clock();
  sim.clock();
  const sltest::Bits settled = sim.output("out_bus");
  for (int attempt = 0; attempt < 200; ++attempt) {
    std::vector<std::uint32_t> codes(8);
    sltest::Bits in(16, 0);
    for (int i = 0; i < 8; ++i) {
      codes[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(rng.uniform_index(4));
      sltest::u64_to_bits(in, 2 * i, 2, codes[static_cast<std::size_t>(i)]);
    }
    if (m.infer_codes_from_codes(codes) == m.infer_codes_from_codes(zero)) continue;
    sim.set_input("in_bus", in);
    sim.clock();
    EXPECT_EQ(sim.output("out_bus"), settled) << "result visible after one cycle";
    sim.clock();
    EXPECT_NE(sim.output("out_bus"), settled);
    return;
  }
  GTEST_SKIP() << "model output is constant";
}

TEST(Rtl, WriteCompiledProducesFiles) {
  const TrainedModel m = make_model(8, {3, 2}, 2, 2, 1, 16);
  const CompiledModel c = compile_model(m);
  const auto rtl = emit_rtl(c.netlist, c.tables);
  const auto dir = sltest::scratch_dir("rtl_write");
  write_compiled(c, rtl, dir);
  EXPECT_TRUE(std::filesystem::exists(dir / "top.v"));
  EXPECT_TRUE(std::filesystem::exists(dir / "layer0.v"));
  EXPECT_TRUE(std::filesystem::exists(dir / "layer1.v"));
  EXPECT_EQ(read_truth_table(dir / "tables" / "1_1.tbl"), c.tables[4]);
}
