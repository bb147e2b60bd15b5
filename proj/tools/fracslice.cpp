// fracslice: command-line front end for the library.
//
// Exit codes: 0 success, 1 invalid input, 2 cylinder budget exceeded.

#include "fracslice/experiments.hpp"
#include "fracslice/io.hpp"
#include "fracslice/projection.hpp"
#include "fracslice/rectangles.hpp"
#include "fracslice/slicing.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace fracslice;

namespace {

struct Options {
    std::string ifs_path;
    std::string preset;
    std::optional<double> rho;
    std::optional<double> theta;
    std::string direction;
    std::string out;
    std::size_t threads = 0;
    double tol = kDefaultTolerance;
    std::size_t cap = kDefaultCylinderCap;
};

std::size_t budget_from_env()
{
    const char* env = std::getenv("FRACTAL_SLICER_BUDGET");
    if (!env || !*env)
        return kDefaultCylinderCap;
    const double v = parse_double(env);
    if (!(v >= 1.0) || v != std::floor(v))
        throw ValidationError(ErrorCode::InvalidArgument, "FRACTAL_SLICER_BUDGET must be a positive integer");
    return static_cast<std::size_t>(v);
}

// "p/q" or an integer; anything else is not rational.
std::optional<Rational> parse_rational(const std::string& s)
{
    const auto slash = s.find('/');
    const std::string num = s.substr(0, slash);
    const std::string den = slash == std::string::npos ? "1" : s.substr(slash + 1);
    auto is_int = [](const std::string& t) {
        const std::size_t from = !t.empty() && t[0] == '-' ? 1 : 0;
        return t.size() > from && t.find_first_not_of("0123456789", from) == std::string::npos;
    };
    if (!is_int(num) || !is_int(den) || BigInt(den) == 0)
        return std::nullopt;
    return Rational(BigInt(num), BigInt(den));
}

IFS load_system(const Options& o)
{
    if (!o.ifs_path.empty() && !o.preset.empty())
        throw ValidationError(ErrorCode::InvalidArgument, "give either --ifs or --preset, not both");
    if (!o.ifs_path.empty())
        return load_ifs(o.ifs_path);
    if (!o.preset.empty())
        return make_preset(o.preset, o.rho);
    throw ValidationError(ErrorCode::InvalidArgument, "an IFS is required (--ifs FILE or --preset NAME)");
}

Direction load_direction(const Options& o)
{
    if (o.theta && !o.direction.empty())
        throw ValidationError(ErrorCode::InvalidArgument, "give either --theta or --direction, not both");
    if (o.theta)
        return Direction::from_angle(*o.theta);
    if (o.direction.empty())
        throw ValidationError(ErrorCode::InvalidArgument, "a direction is required (--theta or --direction x,y)");
    const auto comma = o.direction.find(',');
    if (comma == std::string::npos)
        throw ValidationError(ErrorCode::Parse, "--direction expects x,y");
    const std::string xs = o.direction.substr(0, comma), ys = o.direction.substr(comma + 1);
    const auto xq = parse_rational(xs), yq = parse_rational(ys);
    if (xq && yq) {
        if (*xq == 0 && *yq == 0)
            throw ValidationError(ErrorCode::InvalidArgument, "direction vector must be non-zero");
        return Direction::from_exact_vector(*xq, *yq);
    }
    return Direction::from_vector(parse_double(xs), parse_double(ys));
}

std::string num(double x) { return format_double(x); }

std::string fixed12(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12f", x);
    return buf;
}

// Records every option of `cmd` that was given, plus the IFS in use.
json collect_inputs(const CLI::App* cmd, const std::optional<IFS>& ifs)
{
    json in = json::object();
    for (const CLI::Option* opt : cmd->get_options()) {
        if (opt->get_name() == "--help" || opt->count() == 0)
            continue;
        const auto& res = opt->results();
        in[opt->get_name()] = res.size() == 1 ? json(res.front()) : json(res);
    }
    if (ifs)
        in["ifs_definition"] = ifs_to_json(*ifs);
    if (const char* env = std::getenv("FRACTAL_SLICER_BUDGET"))
        in["FRACTAL_SLICER_BUDGET"] = env;
    return in;
}

struct Output {
    fs::path dir;
    bool active() const { return !dir.empty(); }
    void write(const std::string& name, const std::string& text) const { write_text(dir / name, text); }
    void manifest(const CLI::App* cmd, const std::optional<IFS>& ifs) const
    {
        write("manifest.json", manifest_json(cmd->get_name(), collect_inputs(cmd, ifs)).dump(2) + "\n");
    }
};

void add_ifs_options(CLI::App* cmd, Options& o)
{
    cmd->add_option("--ifs", o.ifs_path, "IFS definition (JSON)");
    cmd->add_option("--preset", o.preset, "four_corner | product_cantor | diagonal_pair | unit_square");
    cmd->add_option("--rho", o.rho, "contraction ratio for the preset");
}

void add_direction_options(CLI::App* cmd, Options& o)
{
    cmd->add_option("--theta", o.theta, "direction angle in radians");
    cmd->add_option("--direction", o.direction, "direction vector x,y (p/q components stay exact)");
}

void add_out_option(CLI::App* cmd, Options& o) { cmd->add_option("--out", o.out, "output directory"); }

json constants_json(const LemmaConstants& lc)
{
    return json{{"side", to_string(lc.side)},
                {"letter", lc.letter},
                {"kappa", num(lc.kappa)},
                {"N", lc.N},
                {"c", num(lc.c)},
                {"A", num(lc.A)},
                {"eta", num(lc.eta)},
                {"tau", num(lc.tau)},
                {"tau_resolution", num(lc.tau_resolution)},
                {"gap", num(lc.gap)},
                {"extent", json::array({num(lc.extent.lo), num(lc.extent.hi)})}};
}

json rect_json(const Rect& r)
{
    return json{{"x", json::array({num(r.x0), num(r.x1)})}, {"y", json::array({num(r.y0), num(r.y1)})}};
}

json pair_json(const RectPair& p)
{
    return json{{"word", to_string(p.word)},
                {"k", p.k},
                {"C", num(p.C)},
                {"anchor", json::array({num(p.anchor.x), num(p.anchor.y)})},
                {"R1", rect_json(p.r1)},
                {"R2", rect_json(p.r2)},
                {"frame", "x = projection, y = fiber"}};
}

json report_json(const RectReport& r)
{
    return json{{"i", r.i},
                {"ii", r.ii},
                {"iii", r.iii},
                {"iv", r.iv},
                {"iv_ratio", num(r.iv_ratio)},
                {"v_ratio", num(r.v_ratio)},
                {"mu_lower", num(r.mu_lower)},
                {"mu_upper", num(r.mu_upper)},
                {"prefix_ok", r.prefix_ok},
                {"cylinders_meeting", r.cylinders_meeting}};
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Slices, projections and packing estimates of planar self-similar sets"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);
    Options o;
    std::function<void()> action;
    CLI::App* chosen = nullptr;
    auto on = [&](CLI::App* cmd, std::function<void()> f) {
        cmd->callback([&, cmd, f] {
            chosen = cmd;
            action = f;
        });
    };

    // dim
    std::vector<double> ratios;
    auto* dim = app.add_subcommand("dim", "similarity dimension (Moran equation)");
    dim->add_option("--ratios", ratios, "comma-separated contraction ratios")->delimiter(',');
    add_ifs_options(dim, o);
    on(dim, [&] {
        const double s = ratios.empty() ? load_system(o).dimension() : solve_moran(ratios);
        std::cout << fixed12(s) << "\n";
    });

    // check-ssc
    std::size_t ssc_depth = 8;
    auto* ssc = app.add_subcommand("check-ssc", "certify the strong separation condition");
    add_ifs_options(ssc, o);
    ssc->add_option("--depth", ssc_depth, "maximum refinement depth")->capture_default_str();
    on(ssc, [&] {
        const IFS ifs = load_system(o);
        const auto rep = check_strong_separation(ifs, ssc_depth);
        if (rep.separated)
            std::cout << "Separated gap=" << num(rep.gap) << " depth=" << rep.depth << "\n";
        else
            std::cout << "NotSeparatedAtDepth depth=" << rep.depth << "\n";
    });

    // project
    auto* project = app.add_subcommand("project", "projected line IFS");
    add_ifs_options(project, o);
    add_direction_options(project, o);
    add_out_option(project, o);
    on(project, [&] {
        const IFS ifs = load_system(o);
        const ProjectedIFS p = project_ifs(ifs, load_direction(o));
        json maps = json::array();
        std::cout << "letter,ratio,offset,weight\n";
        for (std::size_t j = 0; j < p.size(); ++j) {
            std::cout << j + 1 << "," << num(p.maps[j].ratio) << "," << num(p.maps[j].offset) << ","
                      << num(p.weights[j]) << "\n";
            maps.push_back({{"ratio", num(p.maps[j].ratio)},
                            {"offset", num(p.maps[j].offset)},
                            {"weight", num(p.weights[j])}});
        }
        const Output out{o.out};
        if (out.active()) {
            out.write("projected.json", json{{"maps", maps}, {"exact", p.exact.has_value()}}.dump(2) + "\n");
            out.manifest(project, ifs);
        }
    });

    // extent
    auto* extent = app.add_subcommand("extent", "interval hull of the projected attractor");
    add_ifs_options(extent, o);
    add_direction_options(extent, o);
    on(extent, [&] {
        const Interval e = attractor_extent(project_ifs(load_system(o), load_direction(o)));
        std::cout << "[" << num(e.lo) << ", " << num(e.hi) << "]\n";
    });

    // check-b
    auto* check_b = app.add_subcommand("check-b", "fixed-point coincidence check");
    add_ifs_options(check_b, o);
    add_direction_options(check_b, o);
    check_b->add_option("--tol", o.tol, "float comparison tolerance")->capture_default_str();
    on(check_b, [&] {
        const auto rep = check_condition_B(project_ifs(load_system(o), load_direction(o)), o.tol);
        std::cout << (rep.coincidence ? "Fails" : "Holds") << (rep.exact ? " (exact)" : "") << "\n";
        for (const auto& [i, j] : rep.pairs)
            std::cout << "coincidence " << i << " " << j << "\n";
    });

    // check-bprime
    auto* check_bp = app.add_subcommand("check-bprime", "unique endpoint piece check");
    add_ifs_options(check_bp, o);
    add_direction_options(check_bp, o);
    check_bp->add_option("--tol", o.tol, "float comparison tolerance")->capture_default_str();
    on(check_bp, [&] {
        const auto rep = check_condition_B_prime(project_ifs(load_system(o), load_direction(o)), o.tol);
        if (rep.holds)
            std::cout << "Holds side=" << to_string(rep.side) << " letter=" << rep.letter() << "\n";
        else
            std::cout << "Fails\n";
        auto list = [](const std::vector<std::size_t>& v) {
            std::string s;
            for (auto x : v)
                s += (s.empty() ? "" : ",") + std::to_string(x);
            return s;
        };
        std::cout << "left_pieces=" << list(rep.left_pieces) << " right_pieces=" << list(rep.right_pieces) << "\n";
    });

    // overlaps
    std::size_t overlap_depth = 2;
    auto* overlaps = app.add_subcommand("overlaps", "exact overlaps of the projected IFS");
    add_ifs_options(overlaps, o);
    add_direction_options(overlaps, o);
    overlaps->add_option("--depth", overlap_depth, "maximum word length")->capture_default_str();
    overlaps->add_option("--tol", o.tol, "float comparison tolerance")->capture_default_str();
    on(overlaps, [&] {
        const ProjectedIFS p = project_ifs(load_system(o), load_direction(o));
        const auto pairs = detect_exact_overlaps(p, overlap_depth, o.tol, o.cap);
        for (const auto& [u, v] : pairs)
            std::cout << to_string(u) << " " << to_string(v) << "\n";
        std::cout << "pairs=" << pairs.size() << " deduped_dimension=" << fixed12(line_similarity_dimension(deduplicate(p, o.tol)))
                  << "\n";
    });

    // density
    double density_r = 1.0 / 256;
    std::size_t bins = 256;
    auto* density = app.add_subcommand("density", "pushforward density histogram (CSV)");
    add_ifs_options(density, o);
    add_direction_options(density, o);
    add_out_option(density, o);
    density->add_option("--r", density_r, "stopping scale")->capture_default_str();
    density->add_option("--bins", bins, "histogram bins")->capture_default_str();
    on(density, [&] {
        const IFS ifs = load_system(o);
        const auto h = pushforward_density(project_ifs(ifs, load_direction(o)), density_r, bins, o.cap);
        std::string csv = "bin_left,bin_right,mass,density\n";
        for (std::size_t i = 0; i < h.masses.size(); ++i) {
            const Interval b = h.bin(i);
            csv += num(b.lo) + "," + num(b.hi) + "," + num(h.masses[i]) + "," + num(h.masses[i] / h.bin_width) + "\n";
        }
        const Output out{o.out};
        if (out.active()) {
            out.write("density.csv", csv);
            out.manifest(density, ifs);
            std::cout << "sup_density=" << num(h.sup_density()) << " support=" << num(h.support_length()) << "\n";
        } else {
            std::cout << csv;
        }
    });

    // length
    double length_r = 1e-3;
    auto* length = app.add_subcommand("length", "estimated length of the projection");
    add_ifs_options(length, o);
    add_direction_options(length, o);
    length->add_option("--r", length_r, "stopping scale")->capture_default_str();
    on(length, [&] {
        const ProjectedIFS p = project_ifs(load_system(o), load_direction(o));
        std::cout << num(estimate_projection_length(p, length_r, o.cap)) << "\n";
    });

    // slice
    double t = 0.0, slice_r = 1e-2;
    auto* slice = app.add_subcommand("slice", "interval cover of K intersected with a fiber");
    add_ifs_options(slice, o);
    add_direction_options(slice, o);
    add_out_option(slice, o);
    slice->add_option("--t", t, "fiber position")->required();
    slice->add_option("--r", slice_r, "stopping scale")->capture_default_str();
    on(slice, [&] {
        const IFS ifs = load_system(o);
        const SliceCover c = slice_cover(ifs, load_direction(o), t, slice_r, o.cap);
        std::string csv = "lo,hi\n";
        for (const auto& iv : c.intervals)
            csv += num(iv.lo) + "," + num(iv.hi) + "\n";
        std::cout << "components=" << c.components() << " cylinders=" << c.words.size() << "\n";
        const Output out{o.out};
        if (out.active()) {
            out.write("slice.csv", csv);
            out.manifest(slice, ifs);
        } else {
            std::cout << csv;
        }
    });

    // pack
    double delta = 1.0 / 16;
    auto* pack = app.add_subcommand("pack", "packing premeasure estimate of a slice");
    add_ifs_options(pack, o);
    add_direction_options(pack, o);
    add_out_option(pack, o);
    pack->add_option("--t", t, "fiber position")->required();
    pack->add_option("--r", slice_r, "cover stopping scale")->capture_default_str();
    pack->add_option("--delta", delta, "largest packing diameter")->capture_default_str();
    on(pack, [&] {
        const IFS ifs = load_system(o);
        const SliceCover c = slice_cover(ifs, load_direction(o), t, slice_r, o.cap);
        const Packing p = pack_premeasure(c, delta, ifs.dimension());
        std::cout << "premeasure=" << num(p.value) << " items=" << p.items.size() << " exponent=" << num(p.exponent)
                  << "\n";
        const Output out{o.out};
        if (out.active()) {
            std::string csv = "center,diameter\n";
            for (const auto& it : p.items)
                csv += num(it.center) + "," + num(it.diameter) + "\n";
            out.write("packing.csv", csv);
            out.manifest(pack, ifs);
        }
    });

    // slicedim
    std::vector<double> ladder{1e-1, 1e-2, 1e-3, 1e-4};
    auto* slicedim = app.add_subcommand("slicedim", "box-counting dimension of a slice");
    add_ifs_options(slicedim, o);
    add_direction_options(slicedim, o);
    slicedim->add_option("--t", t, "fiber position")->required();
    slicedim->add_option("--ladder", ladder, "decreasing r values")->delimiter(',')->capture_default_str();
    on(slicedim, [&] {
        const auto d = box_dimension_slice(load_system(o), load_direction(o), t, ladder, o.cap);
        std::cout << "slope=" << fixed12(d.slope) << " residual=" << num(d.residual) << "\n";
        for (std::size_t i = 0; i < d.rs.size(); ++i)
            std::cout << num(d.rs[i]) << "," << d.counts[i] << "\n";
    });

    // lemma4-*
    std::string word_text;
    std::size_t k = 0;
    double aspect = 4.0, verify_r = 0.0;
    std::size_t lemma_depth = 8;
    auto lemma_options = [&](CLI::App* cmd, bool pair, bool verify) {
        add_ifs_options(cmd, o);
        add_direction_options(cmd, o);
        add_out_option(cmd, o);
        cmd->add_option("--ssc-depth", lemma_depth, "separation certification depth")->capture_default_str();
        if (pair) {
            cmd->add_option("--word", word_text, "word omega, e.g. 1,3,2 (empty for the root)");
            cmd->add_option("--k", k, "refinement k (0 = minimal)")->capture_default_str();
            cmd->add_option("--C", aspect, "aspect ratio lower bound")->capture_default_str();
        }
        if (verify)
            cmd->add_option("--verify-r", verify_r, "verification scale (default w(R2)/64)");
    };
    auto run_lemma = [&](CLI::App* cmd, bool pair, bool verify) {
        const IFS ifs = load_system(o);
        const Direction dir = load_direction(o);
        const LemmaConstants lc = find_constants(ifs, dir, o.tol, lemma_depth, o.cap);
        json doc{{"constants", constants_json(lc)}};
        if (pair) {
            const RectPair rp = build_rect_pair(ifs, dir, parse_word(word_text, ifs.size()), k, lc, aspect);
            doc["pair"] = pair_json(rp);
            if (verify) {
                const double r = verify_r > 0.0 ? verify_r : rp.r2.width() / 64.0;
                doc["checks"] = report_json(verify_rect_pair(ifs, dir, lc, rp, r, o.cap));
                doc["checks"]["r"] = num(r);
            }
        }
        const std::string text = doc.dump(2) + "\n";
        std::cout << text;
        const Output out{o.out};
        if (out.active()) {
            out.write("lemma4.json", text);
            out.manifest(cmd, ifs);
        }
    };
    auto* l4c = app.add_subcommand("lemma4-constants", "rectangle construction constants");
    lemma_options(l4c, false, false);
    on(l4c, [&, l4c] { run_lemma(l4c, false, false); });
    auto* l4b = app.add_subcommand("lemma4-build", "build a rectangle pair");
    lemma_options(l4b, true, false);
    on(l4b, [&, l4b] { run_lemma(l4b, true, false); });
    auto* l4v = app.add_subcommand("lemma4-verify", "build and verify a rectangle pair");
    lemma_options(l4v, true, true);
    on(l4v, [&, l4v] { run_lemma(l4v, true, true); });

    // experiment
    std::string scenario_path;
    auto* experiment = app.add_subcommand("experiment", "run a scenario file");
    experiment->add_option("--scenario", scenario_path, "scenario (TOML)")->required();
    add_out_option(experiment, o);
    experiment->add_option("--threads", o.threads, "worker cap (0 = all cores)");
    on(experiment, [&] {
        ScenarioFile sf = load_scenario(scenario_path);
        sf.scenario.threads = o.threads;
        sf.scenario.cylinder_cap = o.cap;
        const fs::path dir = o.out.empty() ? sf.output_dir : fs::path(o.out);
        const Output out{dir};
        out.manifest(experiment, sf.scenario.ifs);
        const auto res = run_experiment(sf, dir);
        std::cout << "divergence " << to_string(res.trend.verdict) << " growth=" << num(res.trend.growth_factor)
                  << " monotone_points=" << res.trend.monotone_points << "/" << res.trend.ts.size() << "\n";
        std::cout << "slice_dimension median=" << num(res.dims.median_slope) << " target=" << num(res.dims.target)
                  << " within_band=" << (res.dims.within_band ? "true" : "false") << "\n";
        for (const auto& w : res.trend.conditions.warnings)
            std::cout << "warning: " << w << "\n";
        std::cout << "wrote " << dir.string() << "\n";
    });

    // sweep
    std::vector<double> angles;
    std::size_t random_count = 0, sweep_depth = 2;
    std::uint64_t seed = 1;
    auto* sweep = app.add_subcommand("sweep", "overlap and condition sweep over directions");
    add_ifs_options(sweep, o);
    add_out_option(sweep, o);
    sweep->add_option("--angles", angles, "angles in radians")->delimiter(',');
    sweep->add_option("--random", random_count, "number of uniformly random angles in [0, pi)");
    sweep->add_option("--seed", seed, "seed for --random")->capture_default_str();
    sweep->add_option("--depth", sweep_depth, "overlap word length")->capture_default_str();
    sweep->add_option("--tol", o.tol, "float comparison tolerance")->capture_default_str();
    sweep->add_option("--threads", o.threads, "worker cap (0 = all cores)");
    on(sweep, [&] {
        const IFS ifs = load_system(o);
        std::vector<double> all = angles;
        const auto extra = random_angles(random_count, seed);
        all.insert(all.end(), extra.begin(), extra.end());
        if (all.empty())
            throw ValidationError(ErrorCode::InvalidArgument, "no angles given (--angles or --random)");
        const auto rep = angle_sweep(ifs, all, sweep_depth, o.tol, {1.0 / 16, 1.0 / 64, 1.0 / 256}, o.threads, o.cap);
        std::string csv = "theta,overlaps,condition_B,condition_B_prime,density,extent_lo,extent_hi,exceptional,eligible\n";
        for (const auto& a : rep.angles)
            csv += num(a.theta) + "," + std::to_string(a.overlaps.size()) + "," + (a.b_coincidence ? "Fails" : "Holds") +
                   "," + (a.b_prime_holds ? "Holds" : "Fails") + "," + to_string(a.density) + "," + num(a.extent.lo) +
                   "," + num(a.extent.hi) + "," + (a.exceptional ? "1" : "0") + "," + (a.eligible ? "1" : "0") + "\n";
        std::cout << csv << "exceptional=" << rep.exceptional << "/" << rep.angles.size() << " eligible=" << rep.eligible
                  << "\n";
        const Output out{o.out};
        if (out.active()) {
            out.write("sweep.csv", csv);
            out.manifest(sweep, ifs);
        }
    });

    // write-ifs
    auto* write_ifs = app.add_subcommand("write-ifs", "write an IFS definition (from a preset or a file)");
    add_ifs_options(write_ifs, o);
    std::string ifs_out;
    write_ifs->add_option("--to", ifs_out, "destination JSON file")->required();
    on(write_ifs, [&] {
        save_ifs(ifs_out, load_system(o));
        std::cout << "wrote " << ifs_out << "\n";
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        o.cap = budget_from_env();
        if (action)
            action();
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (chosen)
            std::cerr << chosen->help();
        return 1;
    } catch (const BudgetExceeded& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
