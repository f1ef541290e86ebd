#include "koopman/model_file.hpp"

#include <fstream>

namespace koopman {

using nlohmann::json;

namespace {

template <typename Derived>
json encode(const Eigen::MatrixBase<Derived>& m)
{
    json re = json::array();
    json im = json::array();
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) {
            const std::complex<double> value(m(i, j));
            re.push_back(value.real());
            im.push_back(value.imag());
        }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

const json& field(const json& doc, const char* key)
{
    const auto it = doc.find(key);
    if (it == doc.end())
        throw ModelFileError(std::string("model file: missing field '") + key + "'");
    return *it;
}

CMatrix decode_complex(const json& matrices, const char* name)
{
    const json& m = field(matrices, name);
    const auto rows = field(m, "rows").get<Index>();
    const auto cols = field(m, "cols").get<Index>();
    const auto& re = field(m, "re");
    const auto& im = field(m, "im");
    if (rows < 0 || cols < 0 || !re.is_array() || !im.is_array() || re.size() != static_cast<std::size_t>(rows * cols) ||
        im.size() != re.size())
        throw ModelFileError(std::string("model file: matrix '") + name + "' has inconsistent shape");
    CMatrix out(rows, cols);
    std::size_t k = 0;
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j, ++k)
            out(i, j) = {re[k].get<double>(), im[k].get<double>()};
    return out;
}

Matrix decode_real(const json& matrices, const char* name)
{
    const CMatrix m = decode_complex(matrices, name);
    if (m.size() > 0 && m.imag().cwiseAbs().maxCoeff() != 0.0)
        throw ModelFileError(std::string("model file: matrix '") + name + "' must be real");
    return m.real();
}

CVector decode_column(const json& matrices, const char* name)
{
    const CMatrix m = decode_complex(matrices, name);
    if (m.cols() != 1 && m.size() != 0)
        throw ModelFileError(std::string("model file: '") + name + "' must be a column");
    return m.size() == 0 ? CVector(0) : CVector(m.col(0));
}

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};

json encode_model(const CompanionFit& fit)
{
    return json{{"c_matrix", encode(fit.c_matrix)},
                {"eigenvalues", encode(fit.eigenvalues)},
                {"vandermonde_t", encode(fit.vandermonde_t)},
                {"modes", encode(fit.modes)}};
}

json encode_model(const KoopmanModel& m)
{
    return json{{"k_hat", encode(m.k_hat)},
                {"eigenvalues", encode(m.eigenvalues)},
                {"eigenvectors_p", encode(m.eigenvectors_p)},
                {"modes_v", encode(m.modes_v)},
                {"eigenfunction_rows", encode(m.eigenfunction_rows)},
                {"svd_u", encode(m.svd.u)},
                {"svd_sigma", encode(m.svd.sigma)},
                {"svd_w", encode(m.svd.w)}};
}

json encode_model(const EdmdModel& m)
{
    if (m.dictionary.kind() == Dictionary::Kind::custom)
        throw ModelFileError("model file: custom dictionaries cannot be saved");
    json out{{"k_hat", encode(m.k_hat)},
             {"eigenvalues", encode(m.eigen.values)},
             {"eigenvectors_p", encode(m.eigen.vectors)},
             {"b_coeffs", encode(m.b_coeffs)},
             {"d_coeffs", encode(m.d_coeffs)},
             {"modes_v", encode(m.modes_v)},
             {"svd_u", encode(m.svd.u)},
             {"svd_sigma", encode(m.svd.sigma)},
             {"svd_w", encode(m.svd.w)}};
    if (m.dictionary.kind() == Dictionary::Kind::rbf)
        out["rbf_centers"] = encode(m.dictionary.centers());
    return out;
}

json encode_model(const KernelModel& m)
{
    return json{{"g_gram", encode(m.g_gram)},
                {"a_gram", encode(m.a_gram)},
                {"q_eigvecs", encode(m.q_eigvecs)},
                {"sigma", encode(m.sigma)},
                {"k_hat_u", encode(m.k_hat_u)},
                {"eigenvalues", encode(m.eigen.values)},
                {"eigenvectors", encode(m.eigen.vectors)},
                {"left_vectors", encode(m.left_vectors)},
                {"training_x", encode(m.training_x)},
                {"modes", encode(m.modes)}};
}

json encode_flags(const FittedModel& model)
{
    return std::visit(Overloaded{
                          [](const CompanionFit& f) { return json{{"window", f.window}, {"fit_residual", f.fit_residual}}; },
                          [](const KoopmanModel& m) {
                              return json{{"observable_dim", m.observable_dim},
                                          {"zero_modes", m.zero_modes},
                                          {"degenerate", m.degenerate},
                                          {"fit_residual", m.fit_residual},
                                          {"reconstruction_residual", m.reconstruction_residual}};
                          },
                          [](const EdmdModel& m) {
                              return json{{"observable_dim", m.observable_dim},
                                          {"modes_available", m.modes_available},
                                          {"lifted_residual", m.lifted_residual},
                                          {"d_residual", m.d_residual}};
                          },
                          [](const KernelModel& m) {
                              return json{{"observable_dim", m.observable_dim},
                                          {"singular_eigenvectors", m.singular_eigenvectors}};
                          },
                      },
                      model);
}

CompanionFit decode_companion(const json& mats, const json& flags)
{
    CompanionFit fit;
    fit.c_matrix = decode_real(mats, "c_matrix");
    fit.eigenvalues = decode_column(mats, "eigenvalues");
    fit.vandermonde_t = decode_complex(mats, "vandermonde_t");
    fit.modes = decode_complex(mats, "modes");
    fit.window = field(flags, "window").get<Index>();
    fit.fit_residual = field(flags, "fit_residual").get<double>();
    return fit;
}

KoopmanModel decode_dmd(const json& mats, const json& flags)
{
    KoopmanModel m;
    m.k_hat = decode_real(mats, "k_hat");
    m.eigenvalues = decode_column(mats, "eigenvalues");
    m.eigenvectors_p = decode_complex(mats, "eigenvectors_p");
    m.modes_v = decode_complex(mats, "modes_v");
    m.eigenfunction_rows = decode_complex(mats, "eigenfunction_rows");
    m.svd.u = decode_real(mats, "svd_u");
    m.svd.sigma = decode_real(mats, "svd_sigma");
    m.svd.w = decode_real(mats, "svd_w");
    m.observable_dim = field(flags, "observable_dim").get<Index>();
    m.zero_modes = field(flags, "zero_modes").get<std::vector<Index>>();
    m.degenerate = field(flags, "degenerate").get<bool>();
    m.fit_residual = field(flags, "fit_residual").get<double>();
    m.reconstruction_residual = field(flags, "reconstruction_residual").get<double>();
    return m;
}

EdmdModel decode_edmd(const json& mats, const json& flags, const std::string& spec)
{
    EdmdModel m;
    m.observable_dim = field(flags, "observable_dim").get<Index>();
    const Matrix centers = mats.contains("rbf_centers") ? decode_real(mats, "rbf_centers") : Matrix(m.observable_dim, 0);
    m.dictionary = parse_dictionary(spec, centers);
    m.k_hat = decode_real(mats, "k_hat");
    m.eigen.values = decode_column(mats, "eigenvalues");
    m.eigen.vectors = decode_complex(mats, "eigenvectors_p");
    m.b_coeffs = decode_complex(mats, "b_coeffs");
    m.d_coeffs = decode_real(mats, "d_coeffs");
    m.modes_v = decode_complex(mats, "modes_v");
    m.svd.u = decode_real(mats, "svd_u");
    m.svd.sigma = decode_real(mats, "svd_sigma");
    m.svd.w = decode_real(mats, "svd_w");
    m.modes_available = field(flags, "modes_available").get<bool>();
    m.lifted_residual = field(flags, "lifted_residual").get<double>();
    m.d_residual = field(flags, "d_residual").get<double>();
    return m;
}

KernelModel decode_kernel(const json& mats, const json& flags, const std::string& spec)
{
    KernelModel m;
    m.kernel = parse_kernel(spec);
    m.g_gram = decode_real(mats, "g_gram");
    m.a_gram = decode_real(mats, "a_gram");
    m.q_eigvecs = decode_real(mats, "q_eigvecs");
    m.sigma = decode_real(mats, "sigma");
    m.k_hat_u = decode_real(mats, "k_hat_u");
    m.eigen.values = decode_column(mats, "eigenvalues");
    m.eigen.vectors = decode_complex(mats, "eigenvectors");
    m.left_vectors = decode_complex(mats, "left_vectors");
    m.training_x = decode_real(mats, "training_x");
    m.modes = decode_complex(mats, "modes");
    m.observable_dim = field(flags, "observable_dim").get<Index>();
    m.singular_eigenvectors = field(flags, "singular_eigenvectors").get<bool>();
    return m;
}

}  // namespace

std::string to_string(Algorithm algo)
{
    switch (algo) {
    case Algorithm::companion:
        return "companion";
    case Algorithm::dmd:
        return "dmd";
    case Algorithm::edmd:
        return "edmd";
    case Algorithm::kernel_edmd:
        return "kernel-edmd";
    }
    return {};
}

Algorithm parse_algorithm(std::string_view name)
{
    for (auto algo : {Algorithm::companion, Algorithm::dmd, Algorithm::edmd, Algorithm::kernel_edmd})
        if (to_string(algo) == name)
            return algo;
    throw UsageError("unknown algorithm '" + std::string(name) + "'");
}

std::string ModelFile::basis_spec() const
{
    return std::visit(Overloaded{
                          [](const EdmdModel& m) { return m.dictionary.spec(); },
                          [](const KernelModel& m) { return m.kernel.spec(); },
                          [](const auto&) { return std::string(); },
                      },
                      model);
}

CVector ModelFile::eigenvalues() const
{
    return std::visit(Overloaded{
                          [](const CompanionFit& f) { return f.eigenvalues; },
                          [](const KoopmanModel& m) { return m.eigenvalues; },
                          [](const EdmdModel& m) { return m.eigen.values; },
                          [](const KernelModel& m) { return m.eigen.values; },
                      },
                      model);
}

Index ModelFile::observable_dim() const
{
    return std::visit(Overloaded{
                          [](const CompanionFit& f) { return f.modes.rows(); },
                          [](const auto& m) { return m.observable_dim; },
                      },
                      model);
}

json to_json(const ModelFile& file)
{
    const auto& meta = file.metadata;
    return json{{"schema_version", ModelFile::schema_version},
                {"algorithm", to_string(file.algorithm)},
                {"basis", file.basis_spec()},
                {"metadata",
                 {{"rtol", meta.rtol},
                  {"embed_depth", meta.embed_depth},
                  {"augment_inputs", meta.augment_inputs},
                  {"state_dim", meta.state_dim},
                  {"input_dim", meta.input_dim},
                  {"disturbance_dim", meta.disturbance_dim},
                  {"residuals", meta.residuals}}},
                {"flags", encode_flags(file.model)},
                {"matrices", std::visit([](const auto& m) { return encode_model(m); }, file.model)}};
}

ModelFile from_json(const json& doc)
{
    try {
        if (!doc.is_object())
            throw ModelFileError("model file: top level must be an object");
        const int version = field(doc, "schema_version").get<int>();
        if (version != ModelFile::schema_version)
            throw ModelFileError("model file: schema_version " + std::to_string(version) + " is not supported (expected " +
                                 std::to_string(ModelFile::schema_version) + ")");

        ModelFile file;
        const auto algo = field(doc, "algorithm").get<std::string>();
        try {
            file.algorithm = parse_algorithm(algo);
        } catch (const UsageError& e) {
            throw ModelFileError(std::string("model file: ") + e.what());
        }

        const json& meta = field(doc, "metadata");
        file.metadata.rtol = field(meta, "rtol").get<double>();
        file.metadata.embed_depth = field(meta, "embed_depth").get<Index>();
        file.metadata.augment_inputs = field(meta, "augment_inputs").get<bool>();
        file.metadata.state_dim = field(meta, "state_dim").get<Index>();
        file.metadata.input_dim = field(meta, "input_dim").get<Index>();
        file.metadata.disturbance_dim = field(meta, "disturbance_dim").get<Index>();
        file.metadata.residuals = field(meta, "residuals").get<std::map<std::string, double>>();
        if (file.metadata.embed_depth < 1)
            throw ModelFileError("model file: embed_depth must be at least 1");

        const json& mats = field(doc, "matrices");
        const json& flags = field(doc, "flags");
        const auto basis = field(doc, "basis").get<std::string>();
        switch (file.algorithm) {
        case Algorithm::companion:
            file.model = decode_companion(mats, flags);
            break;
        case Algorithm::dmd:
            file.model = decode_dmd(mats, flags);
            break;
        case Algorithm::edmd:
            file.model = decode_edmd(mats, flags, basis);
            break;
        case Algorithm::kernel_edmd:
            file.model = decode_kernel(mats, flags, basis);
            break;
        }
        return file;
    } catch (const json::exception& e) {
        throw ModelFileError(std::string("model file: ") + e.what());
    } catch (const ModelFileError&) {
        throw;
    } catch (const Error& e) {
        throw ModelFileError(std::string("model file: ") + e.what());
    }
}

void save_model(const ModelFile& file, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw ModelFileError("cannot write '" + path.string() + "'");
    out << to_json(file).dump(2) << '\n';
}

ModelFile load_model(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ModelFileError("cannot open '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ModelFileError("model file '" + path.string() + "': " + e.what());
    }
    return from_json(doc);
}

Prediction predict(const ModelFile& file, const Vector& g0, Index steps)
{
    return std::visit([&](const auto& m) { return predict(m, g0, steps); }, file.model);
}

Vector initial_observable(const CsvTable& table, const FitMetadata& meta)
{
    std::map<std::string, std::size_t> column;
    for (std::size_t c = 0; c < table.header.size(); ++c)
        column[table.header[c]] = c;

    const auto lookup = [&](char prefix, Index count) {
        std::vector<std::size_t> cols;
        for (Index i = 1; i <= count; ++i) {
            const std::string name = prefix + std::to_string(i);
            const auto it = column.find(name);
            if (it == column.end())
                throw DataError("initial condition: missing column '" + name + "'");
            cols.push_back(it->second);
        }
        return cols;
    };
    const auto x_cols = lookup('x', meta.state_dim);
    const auto u_cols = meta.augment_inputs ? lookup('u', meta.input_dim) : std::vector<std::size_t>{};
    const auto d_cols = meta.augment_inputs ? lookup('d', meta.disturbance_dim) : std::vector<std::size_t>{};

    for (const auto& name : table.header) {
        const char prefix = name.empty() ? '\0' : name[0];
        if (name != "t" && prefix != 'x' && prefix != 'u' && prefix != 'd')
            throw DataError("initial condition: unexpected column '" + name + "'");
        if (prefix == 'x' && !std::count_if(x_cols.begin(), x_cols.end(), [&](std::size_t c) { return table.header[c] == name; }))
            throw DataError("initial condition: column '" + name + "' does not match the model's " +
                            std::to_string(meta.state_dim) + " state columns");
    }

    const Index depth = meta.embed_depth;
    if (static_cast<Index>(table.rows.size()) < depth)
        throw DataError("initial condition: model needs " + std::to_string(depth) + " history rows, got " +
                        std::to_string(table.rows.size()));

    const auto first = table.rows.size() - static_cast<std::size_t>(depth);
    Vector g(meta.sample_dim() * depth);
    Index at = 0;
    for (const auto* cols : {&x_cols, &u_cols, &d_cols})
        for (std::size_t r = first; r < table.rows.size(); ++r)
            for (std::size_t c : *cols)
                g(at++) = table.rows[r][c];
    return g;
}

Vector newest_sample(const Vector& g, const FitMetadata& meta)
{
    const Index depth = meta.embed_depth;
    if (g.size() != meta.sample_dim() * depth)
        throw ShapeError("newest_sample: observable has unexpected dimension");
    Vector out(meta.sample_dim());
    Index block_start = 0;
    Index at = 0;
    const Index exo_dims[] = {meta.state_dim, meta.augment_inputs ? meta.input_dim : 0,
                              meta.augment_inputs ? meta.disturbance_dim : 0};
    for (Index dim : exo_dims) {
        out.segment(at, dim) = g.segment(block_start + (depth - 1) * dim, dim);
        at += dim;
        block_start += depth * dim;
    }
    return out;
}

}  // namespace koopman
