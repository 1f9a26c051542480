#include <gtest/gtest.h>

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "nsfk/pipelines.hpp"

using namespace nsfk;
namespace fs = std::filesystem;

namespace {

const std::string kCli = NSFK_CLI_PATH;
const std::string kSource = NSFK_SOURCE_DIR;

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name)
{
    const fs::path d = fs::temp_directory_path() / ("nsfk_cli_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

fs::path write_config(const fs::path& dir, const std::string& text)
{
    const fs::path p = dir / "run.ini";
    std::ofstream(p) << text;
    return p;
}

// Runs the binary quietly and returns its exit code.
int cli(const std::string& args, const std::string& env = {})
{
    const std::string cmd = env + (env.empty() ? "" : " ") + "\"" + kCli + "\" " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string config_path(const std::string& name)
{
    return kSource + "/configs/" + name;
}

nlohmann::json report(const fs::path& dir, const std::string& sub)
{
    return nlohmann::json::parse(slurp(dir / (sub + ".json")));
}

const nlohmann::json* criterion(const nlohmann::json& r, const std::string& name)
{
    for (const auto& c : r["criteria"])
        if (c["name"] == name) return &c;
    return nullptr;
}

}  // namespace

TEST(ConfigParse, SectionsCommentsAndDefaults)
{
    const RunConfig c = parse_config("seed = 7\n"
                                     "# comment\n"
                                     "[closure]\n"
                                     "gamma = 1.4   ; trailing comment\n"
                                     "\n"
                                     "[nonlinear]\n"
                                     "scheme = rk4\n"
                                     "fields = rho, theta\n");
    EXPECT_EQ(c.seed, 7u);
    EXPECT_EQ(c.closure.gamma, 1.4);
    EXPECT_EQ(c.closure.kappa0, 1.0);
    EXPECT_EQ(c.nonlinear.run.scheme, Scheme::RK4);
    ASSERT_EQ(c.nonlinear.run.perturbation.fields.size(), 2u);
    EXPECT_EQ(c.nonlinear.run.perturbation.fields[1], "theta");
    EXPECT_NO_THROW(validate(c));
}

TEST(ConfigParse, ErrorsCarryLineAndField)
{
    auto expect_error = [](const std::string& text, int line, const std::string& field) {
        try {
            parse_config(text, "t.ini");
            ADD_FAILURE() << "accepted: " << text;
        } catch (const ConfigError& e) {
            EXPECT_EQ(e.line(), line) << e.what();
            EXPECT_EQ(e.field(), field) << e.what();
            EXPECT_NE(std::string(e.what()).find("t.ini:" + std::to_string(line)), std::string::npos);
        }
    };
    expect_error("[closure]\nkappa = 1\n", 2, "closure.kappa");
    expect_error("[closure]\nmu0 = 1\nmu0 = 2\n", 3, "closure.mu0");
    expect_error("[closure]\n\nR = fast\n", 3, "closure.R");
    expect_error("[viscosity]\n", 1, "viscosity");
    expect_error("[nonlinear]\nN = 12.5\n", 2, "nonlinear.N");
    expect_error("[nonlinear]\nscheme = euler\n", 2, "nonlinear.scheme");
    expect_error("[closure]\ngamma\n", 2, "");
}

TEST(ConfigValidate, RejectsSubUnitGamma)
{
    const RunConfig c = parse_config("[closure]\ngamma = 0.5\n");
    try {
        validate(c);
        FAIL() << "gamma = 0.5 accepted";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "closure.gamma");
    }
    EXPECT_THROW(validate(parse_config("[nonlinear]\nN = 1000\n")), ConfigError);
    EXPECT_THROW(validate(parse_config("[closure]\nmu0 = -1\n")), ConfigError);
    EXPECT_NO_THROW(validate(parse_config("[closure]\nmu0 = 0\nalpha0 = 0\nkappa0 = 0\n")));
}

TEST(ConfigHash, StableAndSensitive)
{
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    const RunConfig a = parse_config("");
    const RunConfig b = parse_config("[closure]\nmu0 = 1.0\n\n[symbol]\ndelta = 0.05\n");
    EXPECT_EQ(a.hash(), b.hash());
    EXPECT_EQ(a.canonical(), b.canonical());
    EXPECT_NE(a.hash(), parse_config("[closure]\nmu0 = 1.0000000000000002\n").hash());
    EXPECT_NE(a.hash(), parse_config("seed = 1\n").hash());
    EXPECT_EQ(a.hash().size(), 64u);
}

TEST(ConfigHash, CanonicalTextRoundTrips)
{
    // rebuild a sectioned file from the canonical listing and parse it again
    const RunConfig c = parse_config("seed = 3\n[closure]\ntype = ideal_gas_linear_kappa\ngamma = 1.3\n"
                                     "[nonlinear]\nfields = u,theta\nscheme = rk4\n");
    std::istringstream in(c.canonical());
    std::map<std::string, std::string> sections;
    std::string top, line;
    while (std::getline(in, line)) {
        const size_t dot = line.find('.'), eq = line.find(" = ");
        if (eq + 3 == line.size()) continue;  // empty defaults cannot be written back
        if (dot == std::string::npos || dot > eq)
            top += line + "\n";
        else
            sections[line.substr(0, dot)] += line.substr(dot + 1) + "\n";
    }
    std::string text = top;
    for (const auto& [sec, body] : sections) text += "[" + sec + "]\n" + body;
    EXPECT_EQ(parse_config(text).canonical(), c.canonical());
}

TEST(ConfigHash, ShippedConfigsLoadAndValidate)
{
    for (const char* name : {"reference.ini", "nsf.ini", "inviscid.ini", "linear_kappa.ini", "nonlinear_quick.ini"}) {
        const RunConfig c = load_config(config_path(name));
        EXPECT_NO_THROW(validate(c)) << name;
    }
    EXPECT_EQ(load_config(config_path("reference.ini")).hash(), parse_config("").hash());
    EXPECT_THROW(load_config(config_path("missing.ini")), ConfigError);
}

TEST(Binary, UsageErrors)
{
    const fs::path d = scratch("usage");
    EXPECT_EQ(cli(""), 2);
    EXPECT_EQ(cli("verify-thermo"), 2);
    EXPECT_EQ(cli("verify-thermo --config " + (d / "missing.ini").string()), 2);
    EXPECT_EQ(cli("frobnicate --config x"), 2);
    EXPECT_EQ(cli("verify-thermo --config " + write_config(d, "[closure]\ngamma = 0.5\n").string()), 2);
    EXPECT_EQ(cli("verify-thermo --config " + config_path("reference.ini") + " --out " + d.string(), "NSFK_THREADS=zero"), 2);
    EXPECT_EQ(cli("--version"), 0);
}

TEST(Binary, VerifyThermoReferencePasses)
{
    const fs::path d = scratch("thermo");
    ASSERT_EQ(cli("verify-thermo --quiet --config " + config_path("reference.ini") + " --out " + d.string(),
                  "NSFK_THREADS=1"),
              0);
    const nlohmann::json r = report(d, "verify-thermo");
    EXPECT_EQ(r["passed"], true);
    EXPECT_EQ(r["config_hash"], load_config(config_path("reference.ini")).hash());
    EXPECT_EQ(r["version"], kVersion);
    EXPECT_TRUE(fs::exists(d / "thermo_conditions.csv"));
    EXPECT_TRUE(fs::exists(d / "entropy_pair.csv"));
    EXPECT_NE(slurp(d / "verify-thermo.txt").find("config hash"), std::string::npos);
}

TEST(Binary, SeedFlagOverridesConfig)
{
    const fs::path d = scratch("seed");
    ASSERT_EQ(cli("verify-thermo --quiet --seed 99 --config " + config_path("reference.ini") + " --out " + d.string()), 0);
    const nlohmann::json r = report(d, "verify-thermo");
    EXPECT_EQ(r["seed"], 99);
    RunConfig c = load_config(config_path("reference.ini"));
    c.seed = 99;
    EXPECT_EQ(r["config_hash"], c.hash());
}

TEST(Binary, AnalyzeSymbolReportsRegularityGain)
{
    const fs::path d = scratch("symbol");
    ASSERT_EQ(cli("analyze-symbol --quiet --config " + config_path("reference.ini") + " --out " + d.string()), 0);
    const nlohmann::json r = report(d, "analyze-symbol");
    EXPECT_EQ(r["values"]["type"]["classification"], "regularity-gain");
    EXPECT_NEAR(r["values"]["type"]["p"].get<double>(), 1.0, 0.05);
    EXPECT_NEAR(r["values"]["type"]["q"].get<double>(), 0.0, 0.05);
    EXPECT_EQ(r["values"]["friedrichs"]["feasible"], false);
    const std::string sigma = slurp(d / "sigma.csv");
    EXPECT_EQ(sigma.substr(0, sigma.find('\n')), "xi,sigma,bound");
}

TEST(Binary, InviscidFailsStrictDissipativity)
{
    const fs::path d = scratch("inviscid");
    EXPECT_EQ(cli("analyze-symbol --quiet --config " + config_path("inviscid.ini") + " --out " + d.string()), 1);
    const nlohmann::json r = report(d, "analyze-symbol");
    const nlohmann::json* c = criterion(r, "strict dissipativity");
    ASSERT_NE(c, nullptr);
    EXPECT_EQ((*c)["passed"], false);
    EXPECT_NE(slurp(d / "analyze-symbol.txt").find("FAIL strict dissipativity"), std::string::npos);
}

TEST(Binary, CapillarityFreeHasFriedrichsSymmetrizer)
{
    const fs::path d = scratch("nsf");
    EXPECT_EQ(cli("analyze-symbol --quiet --config " + config_path("nsf.ini") + " --out " + d.string()), 0);
    const nlohmann::json r = report(d, "analyze-symbol");
    EXPECT_EQ(r["values"]["friedrichs"]["feasible"], true);
    EXPECT_EQ(r["values"]["lyapunov"]["applicable"], false);
}

TEST(Binary, LinearDecayReferenceExponent)
{
    const fs::path d = scratch("linear");
    ASSERT_EQ(cli("linear-decay --quiet --config " + config_path("reference.ini") + " --out " + d.string()), 0);
    const nlohmann::json r = report(d, "linear-decay");
    const nlohmann::json* c = criterion(r, "decay exponent");
    ASSERT_NE(c, nullptr);
    EXPECT_NEAR((*c)["observed"].get<double>(), -0.25, 0.05);
}

TEST(Binary, NonlinearZeroAmplitudeIsTrivialPass)
{
    const fs::path d = scratch("zero");
    const fs::path cfg = write_config(d, "[nonlinear]\nN = 128\nL = 40\nT = 2\ndt = 0.02\namplitude = 0\n");
    EXPECT_EQ(cli("nonlinear-run --quiet --config " + cfg.string() + " --out " + d.string()), 0);
}

TEST(Binary, NonlinearRejectedStepNamesDt)
{
    const fs::path d = scratch("reject");
    const fs::path cfg = write_config(d, "[nonlinear]\nN = 256\nL = 40\nT = 1\ndt = 0.5\nscheme = rk4\n");
    EXPECT_EQ(cli("nonlinear-run --quiet --config " + cfg.string() + " --out " + d.string()), 1);
    const nlohmann::json r = report(d, "nonlinear-run");
    const nlohmann::json* c = criterion(r, "run completed");
    ASSERT_NE(c, nullptr);
    EXPECT_EQ((*c)["passed"], false);
    EXPECT_NE((*c)["detail"].get<std::string>().find("dt=0.5"), std::string::npos);
    // the ledger keeps the rows sampled before the rejection
    EXPECT_NE(slurp(d / "ledger.csv").find("\n0,"), std::string::npos);
}

TEST(Binary, CsvOutputsAreByteIdentical)
{
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    for (const fs::path& d : {a, b}) {
        ASSERT_EQ(cli("verify-thermo --quiet --config " + config_path("reference.ini") + " --out " + d.string()), 0);
        ASSERT_EQ(cli("analyze-symbol --quiet --config " + config_path("reference.ini") + " --out " + d.string()), 0);
        ASSERT_EQ(cli("nonlinear-run --quiet --config " + config_path("nonlinear_quick.ini") + " --out " + d.string()),
                  0);
    }
    int compared = 0;
    for (const auto& e : fs::directory_iterator(a)) {
        if (e.path().extension() != ".csv") continue;
        EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << e.path().filename();
        ++compared;
    }
    EXPECT_EQ(compared, 6);
}

TEST(Binary, CsvHeadersMatchSchema)
{
    // column names are the first cell of each table row under a "## <file>.csv" heading
    std::map<std::string, std::string> expected;
    std::istringstream in(slurp(kSource + "/schema/csv_schema.md"));
    std::string line, file;
    while (std::getline(in, line)) {
        if (line.rfind("## ", 0) == 0) {
            file = line.substr(3);
        } else if (!file.empty() && line.rfind("| ", 0) == 0 && line.rfind("| column", 0) != 0) {
            const std::string col = line.substr(2, line.find(" |", 2) - 2);
            expected[file] += (expected[file].empty() ? "" : ",") + col;
        }
    }
    ASSERT_EQ(expected.size(), 7u);

    const fs::path d = scratch("schema");
    const std::string cfg = " --quiet --config " + config_path("reference.ini") + " --out " + d.string();
    ASSERT_EQ(cli("verify-thermo" + cfg), 0);
    ASSERT_EQ(cli("analyze-symbol" + cfg), 0);
    ASSERT_EQ(cli("linear-decay" + cfg), 0);
    ASSERT_EQ(cli("nonlinear-run --quiet --config " + config_path("nonlinear_quick.ini") + " --out " + d.string()), 0);
    for (const auto& [name, header] : expected) {
        const std::string text = slurp(d / name);
        EXPECT_EQ(text.substr(0, text.find('\n')), header) << name;
    }
}
