#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "panelcp/changepoint.hpp"
#include "panelcp/datagen.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

using panelcp::PanelDataset;

TEST_CASE("change-point criterion on a clean step") {
    const auto data = PanelDataset::from_rows({{0.0, 0.0, 5.0, 5.0}});
    const auto est = panelcp::estimate_changepoint(data);
    REQUIRE(est.tau_hat == 2);
    REQUIRE(est.objective.size() == 3);
    REQUIRE(est.objective[0] == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(est.objective[1] == Catch::Approx(150.0 / 81.0).margin(1e-12));
    REQUIRE(est.objective[2] == Catch::Approx(25.0 / 16.0).margin(1e-12));
    REQUIRE(est.weights == std::vector<double>{4.0, 9.0, 16.0});
}

TEST_CASE("constant data ties break to the largest t") {
    const auto data = PanelDataset::from_rows({{1.0, 1.0, 1.0, 1.0, 1.0}});
    const auto est = panelcp::estimate_changepoint(data);
    REQUIRE(est.tau_hat == 5);
    for (double v : est.objective) REQUIRE(v == 0.0);
}

TEST_CASE("criterion matches the brute-force objective") {
    std::mt19937 gen(31337);
    for (int trial = 0; trial < 25; ++trial) {
        const auto rows = test_util::random_panel_rows(gen, 3, 6);
        const auto est = panelcp::estimate_changepoint(PanelDataset::from_rows(rows));
        const auto expected = oracle::changepoint_objective_bruteforce(rows, est.weights);
        REQUIRE(est.objective.size() == expected.size());
        for (std::size_t k = 0; k < expected.size(); ++k) {
            REQUIRE(est.objective[k] == Catch::Approx(expected[k]).margin(1e-9));
        }
    }
}

TEST_CASE("no-change panels mostly estimate tau = T") {
    panelcp::ScenarioConfig cfg;
    cfg.id = "sanity";
    cfg.n_panels = 200;
    cfg.horizon = 10;
    cfg.tau = 10;
    int at_horizon = 0;
    const int reps = 60;
    for (int rep = 0; rep < reps; ++rep) {
        cfg.seed = panelcp::derive_seed({9001, static_cast<std::uint64_t>(rep)});
        const auto est = panelcp::estimate_changepoint(panelcp::generate_panel(cfg));
        if (est.tau_hat == 10) ++at_horizon;
    }
    REQUIRE(at_horizon > reps / 2);
}

TEST_CASE("argmin is invariant to per-panel shifts and positive scaling") {
    std::mt19937 gen(2024);
    std::normal_distribution<double> shift_dist(0.0, 3.0);
    std::uniform_real_distribution<double> scale_dist(0.2, 4.0);
    for (int trial = 0; trial < 50; ++trial) {
        auto rows = test_util::random_panel_rows(gen, 3, 8);
        const int tau_base = panelcp::estimate_changepoint(PanelDataset::from_rows(rows)).tau_hat;
        const double scale = scale_dist(gen);
        for (auto& row : rows) {
            const double shift = shift_dist(gen);
            for (double& v : row) v = scale * v + shift;
        }
        REQUIRE(panelcp::estimate_changepoint(PanelDataset::from_rows(rows)).tau_hat == tau_base);
    }
}

TEST_CASE("weight function must be positive") {
    const auto data = PanelDataset::from_rows({{0.0, 1.0, 2.0}});
    REQUIRE_THROWS_AS(panelcp::estimate_changepoint(data, [](int t) { return t - 3.0; }),
                      panelcp::ParameterError);
}

TEST_CASE("segment-wise residuals") {
    SECTION("constant panels vanish") {
        const auto data = PanelDataset::from_rows({{2.0, 2.0, 2.0, 2.0}});
        const auto res = panelcp::compute_residuals(data, 3);
        REQUIRE(res.residuals.cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("perfect step is absorbed") {
        const auto data = PanelDataset::from_rows({{0.0, 0.0, 5.0, 5.0}});
        const auto res = panelcp::compute_residuals(data, 2);
        REQUIRE(res.residuals.cwiseAbs().maxCoeff() == Catch::Approx(0.0).margin(1e-14));
    }
    SECTION("hand-checked three-point panel") {
        const auto data = PanelDataset::from_rows({{1.0, 3.0, 8.0}});
        const auto res = panelcp::compute_residuals(data, 2);
        REQUIRE(res.residuals(0, 0) == Catch::Approx(-1.0));
        REQUIRE(res.residuals(0, 1) == Catch::Approx(1.0));
        REQUIRE(res.residuals(0, 2) == Catch::Approx(0.0).margin(1e-14));
    }
    SECTION("tau bounds are enforced") {
        const auto data = PanelDataset::from_rows({{1.0, 2.0, 3.0}});
        REQUIRE_THROWS_AS(panelcp::compute_residuals(data, 1), panelcp::ParameterError);
        REQUIRE_THROWS_AS(panelcp::compute_residuals(data, 4), panelcp::ParameterError);
    }
    SECTION("both segments of every panel sum to zero") {
        std::mt19937 gen(11);
        for (int trial = 0; trial < 30; ++trial) {
            const auto data = test_util::random_panel(gen, 3, 7);
            for (int tau = 2; tau <= 7; ++tau) {
                const auto res = panelcp::compute_residuals(data, tau);
                for (int i = 0; i < 3; ++i) {
                    double head = 0.0, tail = 0.0;
                    for (int t = 0; t < 7; ++t) {
                        (t < tau ? head : tail) += res.residuals(i, t);
                    }
                    REQUIRE(head == Catch::Approx(0.0).margin(1e-10));
                    REQUIRE(tail == Catch::Approx(0.0).margin(1e-10));
                }
            }
        }
    }
}
