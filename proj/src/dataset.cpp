#include "koopman/dataset.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace koopman {

namespace {

constexpr double time_jitter_rtol = 1e-9;

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line)
{
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return cells;
}

double parse_number(std::string_view cell, long line)
{
    if (!cell.empty() && cell.front() == '+')
        cell.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size())
        throw ParseError("non-numeric cell '" + std::string(cell) + "'", line);
    if (!std::isfinite(value))
        throw ParseError("non-finite cell '" + std::string(cell) + "'", line);
    return value;
}

// Column role parsed from a header such as "x3".
struct ColumnRole {
    char prefix;
    int index;
};

std::optional<ColumnRole> parse_role(const std::string& name)
{
    if (name == "t")
        return ColumnRole{'t', 0};
    if (name.size() < 2 || (name[0] != 'x' && name[0] != 'u' && name[0] != 'd'))
        return std::nullopt;
    int index = 0;
    const auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), index);
    if (ec != std::errc{} || ptr != name.data() + name.size() || index < 1)
        return std::nullopt;
    return ColumnRole{name[0], index};
}

void check_uniform_time(const std::vector<double>& t)
{
    const double dt = t[1] - t[0];
    if (!(dt > 0))
        throw ParseError("time stamps must be strictly increasing", 3);
    for (std::size_t i = 1; i < t.size(); ++i) {
        const double step = t[i] - t[i - 1];
        if (std::abs(step - dt) > time_jitter_rtol * std::abs(dt))
            throw ParseError("non-uniform time stamp", static_cast<long>(i) + 2);
    }
}

void append_block(Vector& column, Index& row, const auto& block)
{
    column.segment(row, block.size()) = block;
    row += block.size();
}

}  // namespace

Trajectory::Trajectory(double dt, Matrix states, Matrix inputs, Matrix disturbances, double t0)
    : dt_(dt), t0_(t0), states_(std::move(states)), inputs_(std::move(inputs)), disturbances_(std::move(disturbances))
{
    if (!(dt_ > 0) || !std::isfinite(dt_))
        throw ParameterError("trajectory: dt must be positive and finite");
    if (states_.rows() == 0 || states_.cols() < 2)
        throw ShapeError("trajectory: need at least 2 samples of a non-empty state");
    if (inputs_.size() > 0 && inputs_.cols() != states_.cols())
        throw ShapeError("trajectory: inputs and states differ in length");
    if (disturbances_.size() > 0 && disturbances_.cols() != states_.cols())
        throw ShapeError("trajectory: disturbances and states differ in length");
    if (inputs_.size() == 0)
        inputs_.resize(0, states_.cols());
    if (disturbances_.size() == 0)
        disturbances_.resize(0, states_.cols());
    require_finite(states_, "trajectory states");
    require_finite(inputs_, "trajectory inputs");
    require_finite(disturbances_, "trajectory disturbances");
}

CsvTable parse_csv(std::istream& in)
{
    CsvTable table;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        const auto cells = split(line);
        if (table.header.empty()) {
            for (const auto cell : cells) {
                if (cell.empty())
                    throw ParseError("empty header cell", line_no);
                table.header.emplace_back(cell);
            }
            continue;
        }
        if (cells.size() != table.header.size())
            throw ParseError("ragged row: expected " + std::to_string(table.header.size()) + " cells, got " +
                                 std::to_string(cells.size()),
                             line_no);
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto cell : cells)
            row.push_back(parse_number(cell, line_no));
        table.rows.push_back(std::move(row));
    }
    if (table.header.empty())
        throw ParseError("missing header row");
    return table;
}

Trajectory parse_trajectory(std::istream& in)
{
    const CsvTable table = parse_csv(in);

    std::optional<std::size_t> time_col;
    std::map<char, std::map<int, std::size_t>> columns;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        const auto role = parse_role(table.header[c]);
        if (!role)
            throw ParseError("unrecognised column '" + table.header[c] + "'", 1);
        if (role->prefix == 't') {
            time_col = c;
            continue;
        }
        if (!columns[role->prefix].emplace(role->index, c).second)
            throw ParseError("duplicate column '" + table.header[c] + "'", 1);
    }
    if (!time_col)
        throw ParseError("missing 't' column", 1);
    for (const auto& [prefix, indexed] : columns) {
        if (indexed.rbegin()->first != static_cast<int>(indexed.size()))
            throw ParseError(std::string("columns ") + prefix + "1.." + prefix + "N must be numbered contiguously", 1);
    }
    if (columns['x'].empty())
        throw ParseError("no state columns x1..xN", 1);
    if (table.rows.size() < 2)
        throw ParseError("trajectory needs at least 2 rows");

    const auto n = static_cast<Index>(table.rows.size());
    const auto fill = [&](char prefix) {
        const auto& indexed = columns[prefix];
        Matrix m(static_cast<Index>(indexed.size()), n);
        for (const auto& [index, col] : indexed)
            for (Index t = 0; t < n; ++t)
                m(index - 1, t) = table.rows[static_cast<std::size_t>(t)][col];
        return m;
    };

    std::vector<double> times;
    times.reserve(table.rows.size());
    for (const auto& row : table.rows)
        times.push_back(row[*time_col]);
    check_uniform_time(times);

    return Trajectory(times[1] - times[0], fill('x'), fill('u'), fill('d'), times[0]);
}

Trajectory load_trajectory(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open '" + path.string() + "'");
    return parse_trajectory(in);
}

std::string format_double(double value)
{
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general, 17);
    return std::string(buf.data(), ptr);
}

void write_trajectory(const Trajectory& traj, std::ostream& out)
{
    out << 't';
    for (Index i = 0; i < traj.state_dim(); ++i)
        out << ",x" << i + 1;
    for (Index i = 0; i < traj.input_dim(); ++i)
        out << ",u" << i + 1;
    for (Index i = 0; i < traj.disturbance_dim(); ++i)
        out << ",d" << i + 1;
    out << '\n';
    for (Index t = 0; t < traj.length(); ++t) {
        out << format_double(traj.t0() + static_cast<double>(t) * traj.dt());
        for (const Matrix* field : {&traj.states(), &traj.inputs(), &traj.disturbances()})
            for (Index i = 0; i < field->rows(); ++i)
                out << ',' << format_double((*field)(i, t));
        out << '\n';
    }
}

void save_trajectory(const Trajectory& traj, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw ParseError("cannot write '" + path.string() + "'");
    write_trajectory(traj, out);
}

Vector observable_at(const Trajectory& traj, Index t, bool augment_inputs)
{
    if (!augment_inputs)
        return traj.states().col(t);
    Vector g(traj.state_dim() + traj.input_dim() + traj.disturbance_dim());
    Index row = 0;
    append_block(g, row, traj.states().col(t));
    append_block(g, row, traj.inputs().col(t));
    append_block(g, row, traj.disturbances().col(t));
    return g;
}

Vector observable_at(const EmbeddedTrajectory& traj, Index t, bool augment_inputs)
{
    if (!augment_inputs)
        return traj.states.col(t);
    Vector g(traj.states.rows() + traj.inputs.rows() + traj.disturbances.rows());
    Index row = 0;
    append_block(g, row, traj.states.col(t));
    append_block(g, row, traj.inputs.col(t));
    append_block(g, row, traj.disturbances.col(t));
    return g;
}

namespace {

// States advance by one column; inputs and disturbances are held at time t.
SnapshotPair shifted_pairs(const Matrix& states, const Matrix& inputs, const Matrix& disturbances, bool augment)
{
    const Index n = states.cols() - 1;
    const Index rows = states.rows() + (augment ? inputs.rows() + disturbances.rows() : 0);
    SnapshotPair pair;
    pair.x.resize(rows, n);
    pair.xp.resize(rows, n);
    pair.x.topRows(states.rows()) = states.leftCols(n);
    pair.xp.topRows(states.rows()) = states.rightCols(n);
    if (augment) {
        const Index held = inputs.rows() + disturbances.rows();
        Matrix exo(held, n);
        exo.topRows(inputs.rows()) = inputs.leftCols(n);
        exo.bottomRows(disturbances.rows()) = disturbances.leftCols(n);
        pair.x.bottomRows(held) = exo;
        pair.xp.bottomRows(held) = exo;
    }
    pair.col_times.resize(static_cast<std::size_t>(n));
    std::iota(pair.col_times.begin(), pair.col_times.end(), Index{0});
    return pair;
}

}  // namespace

SnapshotPair snapshot_pairs(const Trajectory& traj, bool augment_inputs)
{
    if (traj.length() < 2)
        throw ShapeError("snapshot_pairs: trajectory needs at least 2 samples");
    if (augment_inputs && !traj.has_inputs())
        throw ConfigError("snapshot_pairs: input augmentation requested but trajectory has no inputs");
    return shifted_pairs(traj.states(), traj.inputs(), traj.disturbances(), augment_inputs);
}

SnapshotPair snapshot_pairs(const EmbeddedTrajectory& traj, bool augment_inputs)
{
    if (traj.length() < 2)
        throw ShapeError("snapshot_pairs: embedding leaves fewer than 2 windows");
    if (augment_inputs && traj.inputs.rows() == 0)
        throw ConfigError("snapshot_pairs: input augmentation requested but trajectory has no inputs");
    return shifted_pairs(traj.states, traj.inputs, traj.disturbances, augment_inputs);
}

EmbeddedTrajectory delay_embed(const Trajectory& traj, Index depth)
{
    if (depth < 1)
        throw ShapeError("delay_embed: depth must be at least 1");
    if (depth > traj.length())
        throw ShapeError("delay_embed: depth " + std::to_string(depth) + " exceeds trajectory length " +
                         std::to_string(traj.length()));

    const Index windows = traj.length() - depth + 1;
    const auto stack = [&](const Matrix& field) {
        Matrix out(field.rows() * depth, windows);
        for (Index t = 0; t < windows; ++t)
            for (Index k = 0; k < depth; ++k)
                out.block(k * field.rows(), t, field.rows(), 1) = field.col(t + k);
        return out;
    };

    EmbeddedTrajectory out;
    out.depth = depth;
    out.base = std::make_shared<const Trajectory>(traj);
    out.states = stack(traj.states());
    out.inputs = stack(traj.inputs());
    out.disturbances = stack(traj.disturbances());
    return out;
}

SnapshotPair concat_pairs(const std::vector<SnapshotPair>& pairs)
{
    if (pairs.empty())
        throw ShapeError("concat_pairs: nothing to concatenate");
    Index cols = 0;
    for (const auto& p : pairs) {
        if (p.rows() != pairs.front().rows())
            throw ShapeError("concat_pairs: snapshot row counts differ");
        cols += p.cols();
    }
    SnapshotPair out;
    out.x.resize(pairs.front().rows(), cols);
    out.xp.resize(pairs.front().rows(), cols);
    Index at = 0;
    for (const auto& p : pairs) {
        out.x.middleCols(at, p.cols()) = p.x;
        out.xp.middleCols(at, p.cols()) = p.xp;
        out.col_times.insert(out.col_times.end(), p.col_times.begin(), p.col_times.end());
        at += p.cols();
    }
    return out;
}

}  // namespace koopman
