// koopman: simulate, fit, inspect and run Koopman models from CSV data.

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "koopman/model_file.hpp"
#include "koopman/systems.hpp"

namespace {

using namespace koopman;

constexpr int exit_usage = 2;
constexpr int exit_data = 3;
constexpr int exit_numerical = 4;

constexpr double imag_residue_limit = 1e-8;

std::vector<double> parse_numbers(std::string_view text, char sep, const std::string& what)
{
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = std::min(text.find(sep, start), text.size());
        auto token = text.substr(start, end - start);
        while (!token.empty() && token.front() == ' ')
            token.remove_prefix(1);
        while (!token.empty() && token.back() == ' ')
            token.remove_suffix(1);
        if (!token.empty() && token.front() == '+')
            token.remove_prefix(1);
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
        if (token.empty() || ec != std::errc() || ptr != token.data() + token.size())
            throw UsageError(what + ": cannot parse '" + std::string(token) + "' as a number");
        out.push_back(value);
        start = end + 1;
    }
    return out;
}

// "a,b;c,d" -> 2x2, rows separated by ';'.
Matrix parse_matrix(const std::string& text, const std::string& what)
{
    std::vector<std::vector<double>> rows;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = std::min(text.find(';', start), text.size());
        rows.push_back(parse_numbers(std::string_view(text).substr(start, end - start), ',', what));
        start = end + 1;
    }
    Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.front().size())
            throw UsageError(what + ": rows have different lengths");
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
    return m;
}

Vector parse_vector(const std::string& text, const std::string& what)
{
    const auto values = parse_numbers(text, ',', what);
    return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

void write_spectrum(std::ostream& out, const CVector& eigenvalues)
{
    out << "index,re,im,magnitude,phase\n";
    for (Index i = 0; i < eigenvalues.size(); ++i) {
        const auto lambda = eigenvalues(i);
        out << i << ',' << format_double(lambda.real()) << ',' << format_double(lambda.imag()) << ','
            << format_double(std::abs(lambda)) << ',' << format_double(std::arg(lambda)) << '\n';
    }
}

// ---- simulate -------------------------------------------------------------

struct SimulateOptions {
    std::string system;
    std::string matrix;
    std::string input_matrix;
    std::string x0;
    Index steps = 50;
    double theta = 0.3;
    std::string observe = "full";
    double mu = 0.9;
    double lambda = 0.5;
    double c = 1.0;
    Index hold = 5;
    double amplitude = 1.0;
    std::uint64_t seed = 0;
    Index dim = 2;
    std::string out;
};

int run_simulate(const SimulateOptions& o)
{
    SystemSpec spec;
    spec.steps = o.steps;
    std::optional<Vector> x0;
    if (!o.x0.empty())
        x0 = parse_vector(o.x0, "--x0");

    const auto need_matrix = [&]() {
        if (o.matrix.empty())
            throw UsageError("--system " + o.system + " requires --matrix");
        return parse_matrix(o.matrix, "--matrix");
    };

    if (o.system == "linear") {
        spec.kind = systems::Linear{need_matrix()};
    } else if (o.system == "rotation") {
        spec.kind = systems::Rotation{o.theta, o.observe == "full"};
        if (!x0)
            x0 = Vector::Unit(2, 0);
    } else if (o.system == "quadratic") {
        spec.kind = systems::QuadraticInvariant{o.mu, o.lambda, o.c};
    } else if (o.system == "forced") {
        if (o.input_matrix.empty())
            throw UsageError("--system forced requires --input-matrix");
        spec.kind = systems::ForcedLinear{need_matrix(), parse_matrix(o.input_matrix, "--input-matrix"), o.hold,
                                          o.amplitude, o.seed};
    } else {
        spec.kind = systems::Linear{random_stable_matrix(o.dim, o.seed)};
        if (!x0)
            x0 = random_vector(o.dim, o.seed + 1);
    }
    if (!x0)
        throw UsageError("--system " + o.system + " requires --x0");
    spec.initial_state = *x0;

    const Trajectory traj = simulate(spec);
    if (o.out.empty() || o.out == "-")
        write_trajectory(traj, std::cout);
    else
        save_trajectory(traj, o.out);
    return 0;
}

// ---- fit ------------------------------------------------------------------

struct FitOptions {
    std::string algo;
    std::vector<std::string> data;
    std::string dict;
    std::string kernel;
    Index embed = 1;
    bool augment_inputs = false;
    double rtol = default_rtol;
    std::string out;
};

// ‖xp − one-step prediction‖_F / ‖xp‖_F over the training columns.
double one_step_residual(const ModelFile& file, const SnapshotPair& pair)
{
    double err = 0.0;
    for (Index j = 0; j < pair.cols(); ++j) {
        const Prediction p = predict(file, pair.x.col(j), 1);
        err += (p.steps.front() - pair.xp.col(j)).squaredNorm();
    }
    const double scale = pair.xp.squaredNorm();
    return scale > 0.0 ? std::sqrt(err / scale) : std::sqrt(err);
}

// A malformed --dict or --kernel value is a usage error, whatever the parser throws.
template <typename Parse>
auto from_flag(const std::string& flag, Parse&& parse)
{
    try {
        return parse();
    } catch (const Error& e) {
        throw UsageError(flag + ": " + e.what());
    }
}

int run_fit(const FitOptions& o)
{
    const Algorithm algo = parse_algorithm(o.algo);
    if (!o.dict.empty() && algo != Algorithm::edmd)
        throw UsageError("--dict is only valid with --algo edmd");
    if (!o.kernel.empty() && algo != Algorithm::kernel_edmd)
        throw UsageError("--kernel is only valid with --algo kernel-edmd");
    if (o.embed < 1)
        throw UsageError("--embed must be at least 1");

    ModelFile file;
    file.algorithm = algo;
    file.metadata.rtol = o.rtol;
    file.metadata.embed_depth = o.embed;
    file.metadata.augment_inputs = o.augment_inputs;

    std::vector<SnapshotPair> pairs;
    for (std::size_t k = 0; k < o.data.size(); ++k) {
        auto traj = std::make_shared<const Trajectory>(load_trajectory(o.data[k]));
        if (k == 0) {
            file.metadata.state_dim = traj->state_dim();
            file.metadata.input_dim = traj->input_dim();
            file.metadata.disturbance_dim = traj->disturbance_dim();
        } else if (traj->state_dim() != file.metadata.state_dim || traj->input_dim() != file.metadata.input_dim ||
                   traj->disturbance_dim() != file.metadata.disturbance_dim) {
            throw ShapeError("'" + o.data[k] + "' has different columns than '" + o.data.front() + "'");
        }
        if (o.embed > 1)
            pairs.push_back(snapshot_pairs(delay_embed(*traj, o.embed), o.augment_inputs));
        else
            pairs.push_back(snapshot_pairs(*traj, o.augment_inputs));
    }
    const SnapshotPair pair = concat_pairs(pairs);

    switch (algo) {
    case Algorithm::companion: {
        auto fit = fit_companion(pair);
        file.metadata.residuals["fit"] = fit.fit_residual;
        file.model = std::move(fit);
        break;
    }
    case Algorithm::dmd: {
        auto model = fit_svd_dmd(pair, o.rtol);
        file.metadata.residuals["fit"] = model.fit_residual;
        file.metadata.residuals["reconstruction"] = model.reconstruction_residual;
        file.model = std::move(model);
        break;
    }
    case Algorithm::edmd: {
        const auto dict = from_flag("--dict", [&] { return parse_dictionary(o.dict.empty() ? "identity" : o.dict, pair.x); });
        auto model = fit_edmd(pair, dict, o.rtol);
        file.metadata.residuals["lifted"] = model.lifted_residual;
        file.metadata.residuals["observable_regression"] = model.d_residual;
        if (!model.modes_available)
            std::cerr << "warning: eigenfunction basis is singular, modes unavailable\n";
        file.model = std::move(model);
        break;
    }
    case Algorithm::kernel_edmd: {
        const auto kernel = from_flag("--kernel", [&] { return parse_kernel(o.kernel.empty() ? "poly:2" : o.kernel); });
        auto model = fit_kernel_edmd(pair, kernel, o.rtol);
        if (model.singular_eigenvectors)
            std::cerr << "warning: eigenvector matrix is near singular, modes use a pseudoinverse\n";
        file.model = std::move(model);
        break;
    }
    }

    bool modes_ok = true;
    if (const auto* edmd = std::get_if<EdmdModel>(&file.model))
        modes_ok = edmd->modes_available;
    const double training = modes_ok ? one_step_residual(file, pair) : std::nan("");
    file.metadata.residuals["training"] = training;

    save_model(file, o.out);
    std::cerr << "fitted " << to_string(algo) << " on " << pair.cols() << " snapshot pairs of dimension "
              << pair.rows() << ", " << file.eigenvalues().size() << " eigenvalues; wrote " << o.out << '\n';

    const CVector eigenvalues = file.eigenvalues();
    std::cout << "kind,index,re,im\n";
    for (Index i = 0; i < eigenvalues.size(); ++i)
        std::cout << "eigenvalue," << i << ',' << format_double(eigenvalues(i).real()) << ','
                  << format_double(eigenvalues(i).imag()) << '\n';
    std::cout << "training_residual,," << format_double(training) << ",\n";
    return 0;
}

// ---- spectrum / predict ---------------------------------------------------

int run_spectrum(const std::string& model_path)
{
    write_spectrum(std::cout, load_model(model_path).eigenvalues());
    return 0;
}

struct PredictOptions {
    std::string model;
    std::string ic;
    Index steps = 10;
    bool latest = false;
};

int run_predict(const PredictOptions& o)
{
    const ModelFile file = load_model(o.model);
    std::ifstream in(o.ic);
    if (!in)
        throw DataError("cannot open '" + o.ic + "'");
    const CsvTable table = parse_csv(in);
    const Vector g0 = initial_observable(table, file.metadata);
    if (g0.size() != file.observable_dim())
        throw ShapeError("initial condition has " + std::to_string(g0.size()) + " entries, model expects " +
                         std::to_string(file.observable_dim()));

    const Prediction p = predict(file, g0, o.steps);
    if (p.projection_warning)
        std::cerr << "warning: initial condition projected onto a rank-deficient mode basis\n";
    if (p.max_imag_residue > imag_residue_limit)
        throw NumericalError("prediction has imaginary residue " + format_double(p.max_imag_residue) +
                             " above " + format_double(imag_residue_limit));

    const Index width = o.latest ? file.metadata.sample_dim() : g0.size();
    std::cout << "step";
    for (Index i = 1; i <= width; ++i)
        std::cout << ",g" << i;
    std::cout << '\n';
    for (std::size_t m = 0; m < p.steps.size(); ++m) {
        const Vector g = o.latest ? newest_sample(p.steps[m], file.metadata) : p.steps[m];
        std::cout << m + 1;
        for (Index i = 0; i < g.size(); ++i)
            std::cout << ',' << format_double(g(i));
        std::cout << '\n';
    }
    return 0;
}

int exit_code(const Error& e)
{
    switch (e.category()) {
    case ErrorCategory::usage:
        return exit_usage;
    case ErrorCategory::data:
        return exit_data;
    case ErrorCategory::numerical:
        return exit_numerical;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Koopman operator system identification"};
    app.require_subcommand(1);

    SimulateOptions sim;
    auto* simulate_cmd = app.add_subcommand("simulate", "Simulate a discrete map and write a trajectory CSV");
    simulate_cmd->add_option("--system", sim.system, "System kind")
        ->required()
        ->check(CLI::IsMember({"linear", "rotation", "quadratic", "forced", "random-linear"}));
    simulate_cmd->add_option("--matrix", sim.matrix, "State matrix A as \"a,b;c,d\"");
    simulate_cmd->add_option("--input-matrix", sim.input_matrix, "Input matrix B (forced)");
    simulate_cmd->add_option("--x0", sim.x0, "Initial state, comma separated");
    simulate_cmd->add_option("--steps", sim.steps, "Number of map iterations")->capture_default_str();
    simulate_cmd->add_option("--theta", sim.theta, "Rotation angle")->capture_default_str();
    simulate_cmd->add_option("--observe", sim.observe, "Rotation observation")
        ->check(CLI::IsMember({"full", "first"}))
        ->capture_default_str();
    simulate_cmd->add_option("--mu", sim.mu, "Quadratic system mu")->capture_default_str();
    simulate_cmd->add_option("--lambda", sim.lambda, "Quadratic system lambda")->capture_default_str();
    simulate_cmd->add_option("--c", sim.c, "Quadratic system coupling")->capture_default_str();
    simulate_cmd->add_option("--hold", sim.hold, "Samples each forcing value is held")->capture_default_str();
    simulate_cmd->add_option("--amplitude", sim.amplitude, "Forcing amplitude")->capture_default_str();
    simulate_cmd->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
    simulate_cmd->add_option("--dim", sim.dim, "State dimension (random-linear)")->capture_default_str();
    simulate_cmd->add_option("--out", sim.out, "Output CSV (default: stdout)");

    FitOptions fit;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a model from trajectory CSV files");
    fit_cmd->add_option("--algo", fit.algo, "Algorithm")
        ->required()
        ->check(CLI::IsMember({"companion", "dmd", "edmd", "kernel-edmd"}));
    fit_cmd->add_option("--data", fit.data, "Trajectory CSV (repeatable)")->required()->check(CLI::ExistingFile);
    fit_cmd->add_option("--dict", fit.dict, "Dictionary: identity, poly:A, wpoly:A, rbf:W:N (edmd)");
    fit_cmd->add_option("--kernel", fit.kernel, "Kernel: poly:A, gaussian:S, paper_rbf:S (kernel-edmd)");
    fit_cmd->add_option("--embed", fit.embed, "Delay-embedding depth h")->capture_default_str();
    fit_cmd->add_flag("--augment-inputs", fit.augment_inputs, "Append inputs and disturbances to the observables");
    fit_cmd->add_option("--rtol", fit.rtol, "Relative singular value cutoff")->capture_default_str();
    fit_cmd->add_option("--out", fit.out, "Model file to write")->required();

    std::string spectrum_model;
    auto* spectrum_cmd = app.add_subcommand("spectrum", "Print a model's eigenvalues as CSV");
    spectrum_cmd->add_option("model", spectrum_model, "Model file")->required();

    PredictOptions pred;
    auto* predict_cmd = app.add_subcommand("predict", "Forecast observables from an initial condition");
    predict_cmd->add_option("model", pred.model, "Model file")->required();
    predict_cmd->add_option("--ic", pred.ic, "Initial-condition CSV")->required();
    predict_cmd->add_option("--steps", pred.steps, "Forecast horizon")->capture_default_str();
    predict_cmd->add_flag("--latest", pred.latest, "Print only the newest time sample of each observable");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_usage;
    }

    try {
        if (*simulate_cmd)
            return run_simulate(sim);
        if (*fit_cmd)
            return run_fit(fit);
        if (*spectrum_cmd)
            return run_spectrum(spectrum_model);
        return run_predict(pred);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_data;
    }
}
