#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "biexsim/sweep.hpp"
#include "biexsim/units.hpp"

using namespace biexsim;

namespace {

SweepSpec small_spec(SolverKind solver) {
    SweepSpec s;
    s.solver = solver;
    s.areas_pi = {0.5, 1.0, 2.5};
    s.detunings_meV = {0.0, 0.65};
    s.durations_ps = {7.0, 13.0};
    s.dt_ps = 0.8;
    s.memory = 4;
    return s;
}

std::string csv_of(const SweepResult& r) {
    std::ostringstream out;
    write_csv(out, r);
    return out.str();
}

SweepResult synthetic(const std::vector<double>& areas, const std::vector<double>& p_xx, double detuning = 0.0,
                      double fwhm = 13.0) {
    SweepResult r;
    r.spec.areas_pi = areas;
    r.spec.detunings_meV = {detuning};
    r.spec.durations_ps = {fwhm};
    for (std::size_t i = 0; i < areas.size(); ++i) {
        SweepRow row;
        row.theta_pi = areas[i];
        row.detuning_meV = detuning;
        row.fwhm_ps = fwhm;
        row.p_xx = p_xx[i];
        row.p_g = 1.0 - p_xx[i];
        row.converged = true;
        r.rows.push_back(row);
    }
    return r;
}

}  // namespace

TEST_CASE("first resonant maximum of the phonon-free drive") {
    const double theta = first_resonant_maximum(DotParameters{}, 13.0);
    CHECK(theta / units::pi == doctest::Approx(4.94).epsilon(5e-3));
    PulseSpec p;
    p.area_rad = theta;
    const TimeGrid g = TimeGrid::for_pulse(p, 0.4, 1);
    const double at = occupations_of(unitary_evolve(DotParameters{}, p, g).states.back().rho).biexciton;
    CHECK(at > 0.99);
    for (double offset : {-0.05, 0.05}) {
        p.area_rad = theta * (1.0 + offset);
        CHECK(occupations_of(unitary_evolve(DotParameters{}, p, g).states.back().rho).biexciton < at);
    }
    // shorter pulses need less area to reach the same two-photon resonance
    CHECK(first_resonant_maximum(DotParameters{}, 7.0) < theta);
}

TEST_CASE("single-point sweep equals a direct propagation") {
    SweepSpec s;
    s.areas_pi = {2.0};
    s.detunings_meV = {0.65};
    s.durations_ps = {13.0};
    s.dt_ps = 0.8;
    s.memory = 4;
    const SweepResult r = run_sweep(s);
    REQUIRE(r.rows.size() == 1);

    PulseSpec p;
    p.area_rad = 2.0 * first_resonant_maximum(DotParameters{}, 13.0);
    p.detuning_meV = 0.65;
    const Occupations o = final_occupations(DotParameters{}, p, PhononBath{}, TimeGrid::for_pulse(p, 0.8, 4));
    CHECK(r.rows[0].p_g == o.ground);
    CHECK(r.rows[0].p_x == o.exciton);
    CHECK(r.rows[0].p_xx == o.biexciton);
    CHECK(r.rows[0].converged);
    CHECK(r.rows[0].n_c == 4);
    CHECK(r.rows[0].dt_ps == 0.8);
}

TEST_CASE("row order and occupations of a grid") {
    for (SolverKind solver : {SolverKind::unitary, SolverKind::rates}) {
        const SweepSpec s = small_spec(solver);
        const SweepResult r = run_sweep(s);
        REQUIRE(r.rows.size() == s.size());
        std::size_t i = 0;
        for (double fwhm : s.durations_ps) {
            for (double detuning : s.detunings_meV) {
                for (double area : s.areas_pi) {
                    CHECK(r.rows[i].fwhm_ps == fwhm);
                    CHECK(r.rows[i].detuning_meV == detuning);
                    CHECK(r.rows[i].theta_pi == area);
                    CHECK(r.rows[i].solver == solver);
                    CHECK(std::abs(r.rows[i].p_g + r.rows[i].p_x + r.rows[i].p_xx - 1.0) < 1e-6);
                    ++i;
                }
            }
        }
        CHECK(r.resonant_max_rad.size() == 2);
    }
}

TEST_CASE("worker count does not change the result bytes") {
    SweepSpec s = small_spec(SolverKind::pathint);
    s.durations_ps = {13.0};
    const std::string one = csv_of(run_sweep(s));
    s.workers = 4;
    const std::string four = csv_of(run_sweep(s));
    CHECK(one == four);
    s.solver = SolverKind::rates;
    s.workers = 1;
    const std::string rates_one = csv_of(run_sweep(s));
    s.workers = 8;
    CHECK(rates_one == csv_of(run_sweep(s)));
}

TEST_CASE("raw area axis uses the areas as given") {
    SweepSpec s;
    s.solver = SolverKind::unitary;
    s.area_axis = AreaAxis::raw;
    s.areas_pi = {1.0};
    s.detunings_meV = {0.0};
    s.durations_ps = {13.0};
    const SweepResult r = run_sweep(s);
    CHECK(r.resonant_max_rad.empty());
    PulseSpec p;
    p.area_rad = units::pi;
    const double direct =
        occupations_of(unitary_evolve(DotParameters{}, p, TimeGrid::for_pulse(p)).states.back().rho).biexciton;
    CHECK(r.rows[0].p_xx == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("failed points are recorded in their rows") {
    SweepSpec s = small_spec(SolverKind::pathint);
    s.durations_ps = {13.0};
    s.memory_budget_bytes = 1000;
    const SweepResult r = run_sweep(s);
    REQUIRE(r.rows.size() == 6);
    for (const SweepRow& row : r.rows) {
        CHECK(std::isnan(row.p_xx));
        CHECK_FALSE(row.converged);
        CHECK_FALSE(row.error.empty());
    }
}

TEST_CASE("CSV round trip") {
    SweepSpec s = small_spec(SolverKind::rates);
    SweepResult r = run_sweep(s);
    r.rows[1].p_xx = std::numeric_limits<double>::quiet_NaN();
    r.rows[1].converged = false;
    const std::string text = csv_of(r);

    std::istringstream lines(text);
    std::string line;
    std::string columns;
    while (std::getline(lines, line)) {
        if (line.rfind('#', 0) != 0) {
            columns = line;
            break;
        }
    }
    CHECK(columns == "theta_pi,detuning_meV,fwhm_ps,p_g,p_x,p_xx,solver,dt_ps,n_c,converged");
    CHECK(text.find("# version = 0.3.1") != std::string::npos);
    CHECK(text.find("resonant_max_rad") != std::string::npos);

    std::istringstream in(text);
    const ParsedCsv parsed = read_csv(in);
    REQUIRE(parsed.rows.size() == r.rows.size());
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        SweepRow expected = r.rows[i];
        expected.error.clear();
        CHECK(parsed.rows[i] == expected);
    }
    CHECK_FALSE(parsed.header.empty());
    CHECK(csv_of(r) == text);

    std::istringstream bad("theta_pi,detuning_meV,fwhm_ps,p_g,p_x,p_xx,solver,dt_ps,n_c,converged\n1,2,3\n");
    CHECK_THROWS_AS(read_csv(bad), std::runtime_error);
    std::istringstream wrong_columns("a,b\n");
    CHECK_THROWS_AS(read_csv(wrong_columns), std::runtime_error);
}

TEST_CASE("maximum-fidelity curve") {
    const SweepResult r = run_sweep(small_spec(SolverKind::rates));
    const auto full = max_fidelity_curve(r, 0.0, 4.0);
    REQUIRE(full.size() == 4);
    const auto part = max_fidelity_curve(r, 0.8, 2.0);
    REQUIRE(part.size() == full.size());
    for (std::size_t i = 0; i < full.size(); ++i) {
        CHECK(part[i].max_p_xx <= full[i].max_p_xx);
        CHECK(part[i].detuning_meV == full[i].detuning_meV);
        CHECK(part[i].fwhm_ps == full[i].fwhm_ps);
        CHECK(part[i].argmax_theta_pi == 1.0);
    }
    CHECK_THROWS_AS(max_fidelity_curve(r, 3.0, 4.0), std::invalid_argument);
    CHECK_THROWS_AS(max_fidelity_curve(r, 2.0, 1.0), std::invalid_argument);
}

TEST_CASE("plateau width") {
    std::vector<double> x, flat, bump;
    for (int i = 0; i <= 40; ++i) {
        x.push_back(0.1 * i);
        flat.push_back(0.7);
        bump.push_back(std::exp(-std::pow(0.1 * i - 1.0, 2) / 0.02));
    }
    const Plateau whole = robustness_metric(synthetic(x, flat), 0.0, 13.0);
    CHECK(whole.from == 0.0);
    CHECK(whole.to == 4.0);
    CHECK(whole.maximum == 0.7);

    const Plateau narrow = plateau(x, bump, 0.02);
    CHECK(narrow.from == doctest::Approx(1.0));
    CHECK(narrow.to == doctest::Approx(1.0));
    CHECK(narrow.maximum == 1.0);

    // the longest of two runs wins
    const Plateau two = plateau({0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, {1, 0, 0.99, 0.99, 0.995, 0, 1, 1, 0, 0}, 0.02);
    CHECK(two.from == 2.0);
    CHECK(two.to == 4.0);

    CHECK_THROWS_AS(robustness_metric(synthetic({0, 1, 2}, {0.1, 0.2, 0.3}), 0.0, 13.0), std::invalid_argument);
    CHECK_THROWS_AS(robustness_metric(synthetic(x, flat), 0.3, 13.0), std::invalid_argument);
}

TEST_CASE("sweep validation") {
    SweepSpec s = small_spec(SolverKind::unitary);
    CHECK_NOTHROW(s.validate());
    SweepSpec bad = s;
    bad.areas_pi.clear();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = s;
    bad.detunings_meV = {0.5, 0.1};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = s;
    bad.durations_ps = {13.0, 13.0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = s;
    bad.workers = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = s;
    bad.areas_pi = {-1.0, 1.0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    CHECK_THROWS_AS(run_sweep(bad), std::invalid_argument);
    CHECK_THROWS_AS(parse_solver("euler"), std::invalid_argument);
    CHECK(parse_solver(solver_name(SolverKind::rates)) == SolverKind::rates);
    CHECK(parse_area_axis("raw") == AreaAxis::raw);
}

TEST_CASE("plot script references both data files") {
    const SweepResult r = run_sweep(small_spec(SolverKind::rates));
    std::ostringstream gp;
    write_plot_script(gp, r, "sweep.csv", "max_fidelity.csv");
    CHECK(gp.str().find("sweep.csv") != std::string::npos);
    CHECK(gp.str().find("max_fidelity.csv") != std::string::npos);
    std::ostringstream fid;
    write_max_fidelity_csv(fid, max_fidelity_curve(r, 0.0, 4.0));
    CHECK(fid.str().rfind("fwhm_ps,detuning_meV,max_p_xx,argmax_theta_pi\n", 0) == 0);
}
