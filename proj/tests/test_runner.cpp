#include <anoflow/runner.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

using namespace anoflow;
using Catch::Approx;

namespace {

std::string config_file(const std::string& name) {
  return std::string(ANOFLOW_CONFIG_DIR) + "/" + name;
}

// minimal single-verifier config used by the parsing sections
std::string tiny_config(const std::string& verifier_entry) {
  return std::string(R"({
    "model": {"name": "cat_suspension", "parameters": {}},
    "seed": 9001,
    "grid": {"n": 4, "random_samples": 8},
    "verifiers": [)") +
         verifier_entry + R"(],
    "output": {"report": "", "verbosity": 0}
  })";
}

}  // namespace

TEST_CASE("config parsing and validation", "[runner]") {
  SECTION("well-formed config round-trips") {
    const RunConfig cfg =
        parse_config(tiny_config(R"({"id": "metric1", "tol": 1e-8})"), "mem");
    CHECK(cfg.model_name == "cat_suspension");
    CHECK(cfg.seed == 9001);
    CHECK(cfg.grid.n == 4);
    CHECK(cfg.grid.random_samples == 8);
    CHECK(cfg.grid.seed == 9001);
    REQUIRE(cfg.verifiers.size() == 1);
    CHECK(cfg.verifiers[0].at("id") == "metric1");
    CHECK(cfg.verbosity == 0);
  }

  SECTION("unknown model is rejected with the name in the diagnostic") {
    const std::string text = R"({
      "model": {"name": "dog_suspension"},
      "verifiers": [{"id": "metric1"}]
    })";
    try {
      parse_config(text, "mem");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("dog_suspension") != std::string::npos);
      CHECK(std::string(e.what()).find("cat_suspension") != std::string::npos);
    }
  }

  SECTION("unknown verifier id is rejected at parse time") {
    try {
      parse_config(tiny_config(R"({"id": "metric7"})"), "mem");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("metric7") != std::string::npos);
      CHECK(std::string(e.what()).find("cartan") != std::string::npos);
    }
  }

  SECTION("unknown override key names the field") {
    try {
      parse_config(tiny_config(R"({"id": "metric1", "tolerance": 1e-8})"),
                   "mem");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("tolerance") != std::string::npos);
      CHECK(std::string(e.what()).find("metric1") != std::string::npos);
    }
  }

  SECTION("malformed text reports the line") {
    const std::string text = "{\n  \"model\": {\n  \"oops\n}";
    try {
      parse_config(text, "broken.json");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("broken.json:") != std::string::npos);
    }
  }

  SECTION("numeric ranges are enforced") {
    CHECK_THROWS_AS(
        parse_config(tiny_config(R"({"id": "metric1", "tol": -1.0})"), "mem"),
        ConfigError);
    CHECK_THROWS_AS(parse_config(R"({
      "model": {"name": "cat_suspension"},
      "grid": {"n": 1},
      "verifiers": [{"id": "metric1"}]
    })",
                                 "mem"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(R"({
      "model": {"name": "t3_pA", "parameters": {"m": 2}},
      "verifiers": [{"id": "contchar"}]
    })",
                                 "mem"),
                    ConfigError);
  }

  SECTION("empty verifier list is rejected") {
    CHECK_THROWS_AS(parse_config(R"({
      "model": {"name": "cat_suspension"},
      "verifiers": []
    })",
                                 "mem"),
                    ConfigError);
  }

  SECTION("missing file is a ConfigError") {
    CHECK_THROWS_AS(load_config("/nonexistent/anoflow.json"), ConfigError);
  }

  SECTION("shipped configs parse") {
    CHECK(load_config(config_file("cat_all.json")).verifiers.size() == 8);
    CHECK(load_config(config_file("t3_contchar.json")).model_name == "t3_pA");
    CHECK_THROWS_AS(load_config(config_file("bad_verifier.json")),
                    ConfigError);
  }
}

TEST_CASE("registries enumerate the stable names", "[runner]") {
  const std::vector<std::string> verifier_ids = {
      "cartan", "claims", "contchar", "contcomp", "metric1", "push", "reeb"};
  CHECK(verifier_registry().size() == verifier_ids.size());
  for (const auto& id : verifier_ids)
    CHECK(verifier_registry().count(id) == 1);
  CHECK(model_registry().count("cat_suspension") == 1);
  CHECK(model_registry().count("t3_pA") == 1);

  const std::string vtext = list_verifiers_text();
  for (const auto& id : verifier_ids)
    CHECK(vtext.find(id) != std::string::npos);
  const std::string mtext = list_models_text();
  CHECK(mtext.find("cat_suspension") != std::string::npos);
  CHECK(mtext.find("t3_pA") != std::string::npos);
  // std::map iteration: listings are sorted, hence stable across runs
  CHECK(list_verifiers_text() == vtext);
  CHECK(mtext.find("cat_suspension") < mtext.find("t3_pA"));
}

TEST_CASE("single-verifier run produces a well-formed document", "[runner]") {
  RunConfig cfg =
      parse_config(tiny_config(R"({"id": "contcomp", "form": "plus"})"), "mem");

  const RunOutcome outcome = run_verifiers(cfg);
  CHECK(outcome.n_pass == 1);
  CHECK(outcome.n_fail == 0);
  CHECK(outcome.all_pass());
  CHECK(outcome.exit_code() == 0);

  const ordered_json& doc = outcome.document;
  CHECK(doc.at("tool").at("name") == "anoflow");
  CHECK(doc.at("tool").at("version") == std::string(tool_version));
  CHECK(doc.at("model").at("name") == "cat_suspension");
  CHECK(doc.at("seed") == 9001);
  REQUIRE(doc.at("verifiers").size() == 1);
  const ordered_json& rep = doc.at("verifiers").at(0);
  CHECK(rep.at("id") == "contcomp");
  CHECK(rep.at("verdict") == "pass");
  CHECK(rep.at("residuals").size() >= 2);
  CHECK(rep.at("margins").size() >= 1);
  CHECK(doc.at("summary").at("all_pass") == true);

  // key order is part of the contract
  const std::string bytes = render_document(doc);
  CHECK(bytes.find("\"tool\"") < bytes.find("\"model\""));
  CHECK(bytes.find("\"model\"") < bytes.find("\"seed\""));
  CHECK(bytes.find("\"verifiers\"") < bytes.find("\"summary\""));
  // wall time must never reach the serialized bytes
  CHECK(bytes.find("runtime") == std::string::npos);
}

TEST_CASE("documents are byte-identical across repeats and workers",
          "[runner]") {
  RunConfig cfg = parse_config(
      tiny_config(
          R"({"id": "metric1"}, {"id": "contchar"}, {"id": "cartan"})"),
      "mem");

  const std::string once = render_document(run_verifiers(cfg, 1).document);
  const std::string again = render_document(run_verifiers(cfg, 1).document);
  const std::string parallel = render_document(run_verifiers(cfg, 3).document);
  CHECK(once == again);
  CHECK(once == parallel);

  // a different seed must actually reach the samplers
  RunConfig reseeded = cfg;
  reseeded.seed = 4242;
  reseeded.grid.seed = 4242;
  const std::string other = render_document(run_verifiers(reseeded).document);
  CHECK(other != once);
  CHECK(other.find("4242") != std::string::npos);
}

TEST_CASE("failing model run maps to exit code 1", "[runner]") {
  const RunConfig cfg = load_config(config_file("t3_contchar.json"));
  const RunOutcome outcome = run_verifiers(cfg, 3);
  CHECK_FALSE(outcome.all_pass());
  CHECK(outcome.exit_code() == 1);
  const ordered_json& rep = outcome.document.at("verifiers").at(0);
  CHECK(rep.at("verdict") != "pass");
  CHECK(outcome.document.at("summary").at("all_pass") == false);

  // archived regression: the z = 0 invariant torus kills the unstable rate
  bool saw_rate_margin = false;
  for (const auto& m : rep.at("margins")) {
    if (m.at("name") == "unstable_rate_margin") {
      saw_rate_margin = true;
      CHECK(m.at("value").get<double>() < 1e-3);
    }
  }
  CHECK(saw_rate_margin);
}

TEST_CASE("evaluation errors surface as exceptions, not verdicts",
          "[runner]") {
  // claims needs a frame; t3_pA has no closed-form one and no alpha_s/u, so
  // the decomposition path is exercised; reeb needs an invariant volume
  RunConfig cfg = parse_config(R"({
    "model": {"name": "t3_pA", "parameters": {"m": -1, "n": 1, "eps": 0.3, "eps2": 0.6}},
    "grid": {"n": 2, "random_samples": 2},
    "verifiers": [{"id": "reeb"}],
    "output": {"verbosity": 0}
  })",
                               "mem");
  CHECK_THROWS_AS(run_verifiers(cfg), ContactError);
}

TEST_CASE("csv export matches the closed-form fields", "[runner]") {
  const FlowModel cat = cat_suspension();

  SECTION("r_u is the constant top eigenvalue log") {
    const std::string csv = export_field_csv(cat, "r_u", 8);
    std::istringstream in(csv);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "x,y,z,value");
    int rows = 0;
    double first_x = -1.0, first_y = -1.0, first_z = -1.0;
    while (std::getline(in, line)) {
      const auto c1 = line.find(',');
      const auto c2 = line.find(',', c1 + 1);
      const auto c3 = line.find(',', c2 + 1);
      REQUIRE(c3 != std::string::npos);
      const double v = std::stod(line.substr(c3 + 1));
      CHECK(v == Approx(cat_log_lambda()).margin(1e-9));
      if (rows == 0) {
        first_x = std::stod(line.substr(0, c1));
        first_y = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
        first_z = std::stod(line.substr(c2 + 1, c3 - c2 - 1));
      }
      ++rows;
    }
    CHECK(rows == 8 * 8 * 8);
    CHECK(first_x == 0.0);
    CHECK(first_y == 0.0);
    CHECK(first_z == 0.0);
  }

  SECTION("div vanishes for the volume-preserving suspension") {
    const std::string csv = export_field_csv(cat, "div", 4);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      const double v = std::stod(line.substr(line.rfind(',') + 1));
      CHECK(std::fabs(v) < 1e-9);
    }
  }

  SECTION("domination margin is the rate gap") {
    const std::string csv = export_field_csv(cat, "domination_margin", 3);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      const double v = std::stod(line.substr(line.rfind(',') + 1));
      CHECK(v == Approx(2.0 * cat_log_lambda()).margin(1e-9));
    }
  }

  SECTION("deterministic bytes and full precision") {
    const std::string a = export_field_csv(cat, "contact_volume", 4);
    const std::string b = export_field_csv(cat, "contact_volume", 4);
    CHECK(a == b);
    // 17 significant digits survive the round trip
    std::istringstream in(export_field_csv(cat, "r_u", 2));
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    const double v = std::stod(line.substr(line.rfind(',') + 1));
    CHECK(v == cat_log_lambda());
  }

  SECTION("unknown field names the alternatives") {
    try {
      export_field_csv(cat, "vorticity", 4);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("domination_margin") !=
            std::string::npos);
    }
  }
}
