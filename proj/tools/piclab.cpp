// Command-line front end: compute the curvature quadratic, certify cone
// margins, integrate the reaction ODE, run verification campaigns, estimate
// cone constants, and write model tensors.
//
// Exit codes: 0 success/PASS, 1 negative result (non-member, FAIL, blow-up),
// 2 usage or validation error, 3 INCONCLUSIVE campaign.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "piclab/piclab.hpp"

namespace {

using namespace piclab;

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty())
        std::cout << content << '\n';
    else
        io::write_text_file(out_path, content + "\n");
}

ConeKind parse_cone(const std::string& name) {
    if (name == "pic") return ConeKind::pic;
    if (name == "pic1") return ConeKind::pic1;
    if (name == "pic2") return ConeKind::pic2;
    throw Error("unknown cone: " + name);
}

int run(int argc, char** argv) {
    CLI::App app{"numerical laboratory for algebraic curvature tensors"};
    app.require_subcommand(1);

    // Shared option storage; each subcommand binds the flags it supports.
    std::string input, out_path, cone_str = "pic", format, campaign;
    int n = 5, trials = 100, restarts = 64, workers = 1;
    double delta = 0.0, theta = 0.0, t_end = 1.0;
    std::uint64_t seed = 0;
    bool normalized = false;

    const auto cone_values = CLI::IsMember({"pic", "pic1", "pic2"});

    CLI::App* cmd_q = app.add_subcommand("q", "curvature quadratic Q of a tensor file");
    cmd_q->add_option("input", input, "tensor JSON file")->required();
    cmd_q->add_option("--out", out_path, "output tensor JSON (default: stdout)");
    cmd_q->add_option("--format", format)->check(CLI::IsMember({"json"}));

    CLI::App* cmd_margin = app.add_subcommand("margin", "certify the cone margin of a tensor");
    cmd_margin->add_option("input", input, "tensor JSON file")->required();
    cmd_margin->add_option("--cone", cone_str)->check(cone_values);
    cmd_margin->add_option("--delta", delta)->check(CLI::NonNegativeNumber);
    cmd_margin->add_option("--seed", seed);
    cmd_margin->add_option("--restarts", restarts)->check(CLI::PositiveNumber);
    cmd_margin->add_option("--workers", workers)->check(CLI::PositiveNumber);
    cmd_margin->add_option("--out", out_path, "certificate JSON (default: stdout)");
    cmd_margin->add_option("--format", format)->check(CLI::IsMember({"json"}));

    CLI::App* cmd_flow = app.add_subcommand("flow", "integrate dR/dt = Q(R) from a tensor file");
    cmd_flow->add_option("input", input, "tensor JSON file")->required();
    cmd_flow->add_option("--t-end", t_end)->check(CLI::PositiveNumber);
    cmd_flow->add_flag("--normalized", normalized, "hold scal constant by rescaling");
    cmd_flow->add_option("--seed", seed);
    cmd_flow->add_option("--restarts", restarts, "margin search restarts per sample")
        ->check(CLI::PositiveNumber);
    cmd_flow->add_option("--workers", workers)->check(CLI::PositiveNumber);
    cmd_flow->add_option("--out", out_path, "trajectory file (default: stdout)");
    cmd_flow->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));

    CLI::App* cmd_verify = app.add_subcommand("verify", "run a verification campaign");
    cmd_verify
        ->add_option("campaign", campaign,
                     "one of: ricci-bound, two-positive, pic-preservation, pic1-pic2, "
                     "flow-preservation")
        ->required()
        ->check(CLI::IsMember({"ricci-bound", "two-positive", "pic-preservation", "pic1-pic2",
                               "flow-preservation"}));
    cmd_verify->add_option("--n", n)->check(CLI::Range(kMinDim, kMaxDim));
    cmd_verify->add_option("--cone", cone_str)->check(cone_values);
    cmd_verify->add_option("--delta", delta)->check(CLI::NonNegativeNumber);
    cmd_verify->add_option("--theta", theta)->check(CLI::NonNegativeNumber);
    cmd_verify->add_option("--seed", seed);
    cmd_verify->add_option("--trials", trials)->check(CLI::PositiveNumber);
    cmd_verify->add_option("--t-end", t_end)->check(CLI::PositiveNumber);
    cmd_verify->add_option("--restarts", restarts)->check(CLI::PositiveNumber);
    cmd_verify->add_option("--workers", workers)->check(CLI::PositiveNumber);
    cmd_verify->add_option("--out", out_path, "report JSON (default: stdout)");
    cmd_verify->add_option("--format", format)->check(CLI::IsMember({"json"}));

    CLI::App* cmd_constants =
        app.add_subcommand("constants", "estimate the cone structure constants");
    cmd_constants->add_option("--cone", cone_str)->check(cone_values);
    cmd_constants->add_option("--n", n)->check(CLI::Range(kMinDim, kMaxDim));
    cmd_constants->add_option("--trials", trials)->check(CLI::PositiveNumber);
    cmd_constants->add_option("--seed", seed);
    cmd_constants->add_option("--restarts", restarts)->check(CLI::PositiveNumber);
    cmd_constants->add_option("--workers", workers)->check(CLI::PositiveNumber);
    cmd_constants->add_option("--out", out_path, "constants JSON (default: stdout)");
    cmd_constants->add_option("--format", format)->check(CLI::IsMember({"json"}));

    CLI::App* cmd_models = app.add_subcommand("models", "write model tensor files");
    cmd_models->add_option("--n", n)->check(CLI::Range(kMinDim, kMaxDim));
    cmd_models->add_option("--out", out_path, "output directory (default: .)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints help text or the usage error
        return code == 0 ? 0 : 2;
    }

    if (cmd_q->parsed()) {
        const CurvatureTensor r = io::read_tensor_file(input);
        emit(out_path, io::tensor_to_json(q_map(r)));
        return 0;
    }

    if (cmd_margin->parsed()) {
        const CurvatureTensor r = io::read_tensor_file(input);
        const ConeSpec cone{parse_cone(cone_str), delta};
        SearchParams sp;
        sp.restarts = restarts;
        sp.seed = seed;
        sp.workers = workers;
        const MembershipResult res = is_member(r, cone, sp);
        emit(out_path, io::certificate_to_json(res.certificate));
        return res.member ? 0 : 1;
    }

    if (cmd_flow->parsed()) {
        const CurvatureTensor r = io::read_tensor_file(input);
        FlowOptions fo;
        fo.normalized = normalized;
        fo.seed = seed;
        fo.margin_restarts = std::max(4, restarts / 4);
        fo.workers = workers;
        const bool as_json = format == "json";
        Trajectory partial;
        try {
            const Trajectory traj = flow(r, t_end, fo, &partial);
            emit(out_path, as_json ? io::trajectory_to_json(traj) : io::trajectory_to_csv(traj));
            return 0;
        } catch (const BlowUp& e) {
            emit(out_path,
                 as_json ? io::trajectory_to_json(partial) : io::trajectory_to_csv(partial));
            std::cerr << "blow-up: " << e.what() << '\n';
            return 1;
        }
    }

    if (cmd_verify->parsed()) {
        CampaignConfig cfg;
        cfg.n = n;
        cfg.cone = ConeSpec{parse_cone(cone_str), delta};
        cfg.trials = trials;
        cfg.seed = seed;
        cfg.theta = theta;
        cfg.t_end = t_end;
        cfg.restarts = restarts;
        cfg.workers = workers;
        CampaignReport rep;
        if (campaign == "ricci-bound")
            rep = verify_ricci_bound(cfg);
        else if (campaign == "two-positive")
            rep = verify_two_positive_derivative(cfg);
        else if (campaign == "pic-preservation")
            rep = verify_pic_preservation(cfg);
        else if (campaign == "pic1-pic2")
            rep = verify_pic1_pic2_step(cfg);
        else
            rep = verify_flow_preservation(cfg);
        emit(out_path, io::campaign_report_to_json(rep));
        if (rep.violated > 0) return 1;
        if (rep.inconclusive) return 3;
        return 0;
    }

    if (cmd_constants->parsed()) {
        SamplerParams sp;
        sp.restarts = restarts;
        sp.workers = workers;
        const ConstantsReport rep =
            estimate_constants(parse_cone(cone_str), n, trials, seed, sp);
        emit(out_path, io::constants_report_to_json(rep));
        return 0;
    }

    if (cmd_models->parsed()) {
        const std::string dir = out_path.empty() ? "." : out_path;
        std::filesystem::create_directories(dir);
        const std::string sphere = dir + "/sphere_n" + std::to_string(n) + ".json";
        const std::string cylinder = dir + "/cylinder_n" + std::to_string(n) + ".json";
        io::write_tensor_file(sphere, sphere_tensor(n, 1.0));
        io::write_tensor_file(cylinder, cylinder_tensor(n, 1.0));
        std::cout << sphere << '\n' << cylinder << '\n';
        return 0;
    }

    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const piclab::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
