#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <variant>

#include <json.hpp>

#include "koopman/dataset.hpp"
#include "koopman/dmd.hpp"
#include "koopman/edmd.hpp"
#include "koopman/kernel_edmd.hpp"

namespace koopman {

enum class Algorithm { companion, dmd, edmd, kernel_edmd };

std::string to_string(Algorithm algo);
Algorithm parse_algorithm(std::string_view name);

/// How the snapshot columns were assembled from the raw trajectory.
struct FitMetadata {
    double rtol = default_rtol;
    /// Embedding depth h; 1 means no delay embedding.
    Index embed_depth = 1;
    bool augment_inputs = false;
    Index state_dim = 0;
    Index input_dim = 0;
    Index disturbance_dim = 0;
    std::map<std::string, double> residuals;

    /// Observable entries contributed by one time sample.
    Index sample_dim() const
    {
        return state_dim + (augment_inputs ? input_dim + disturbance_dim : 0);
    }
};

using FittedModel = std::variant<CompanionFit, KoopmanModel, EdmdModel, KernelModel>;

struct ModelFile {
    static constexpr int schema_version = 1;

    Algorithm algorithm = Algorithm::dmd;
    FitMetadata metadata;
    FittedModel model;

    /// Dictionary or kernel spec string; empty for DMD variants.
    std::string basis_spec() const;
    CVector eigenvalues() const;
    Index observable_dim() const;
};

nlohmann::json to_json(const ModelFile& file);
ModelFile from_json(const nlohmann::json& doc);

void save_model(const ModelFile& file, const std::filesystem::path& path);
ModelFile load_model(const std::filesystem::path& path);

/// Spectral forecast with whichever model the file holds.
Prediction predict(const ModelFile& file, const Vector& g0, Index steps);

/// Builds the model's initial observable from the last embed_depth rows of an
/// initial-condition table with x*/u*/d* columns (a t column is ignored).
Vector initial_observable(const CsvTable& table, const FitMetadata& meta);

/// Newest time sample of an observable vector in the fitted layout.
Vector newest_sample(const Vector& g, const FitMetadata& meta);

}  // namespace koopman
