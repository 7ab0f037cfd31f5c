#include "spectral_forge/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "spectral_forge/error.hpp"

namespace spectral_forge {

namespace {

using nlohmann::json;

std::int64_t as_int(const json& v, const std::string& what) {
    if (!v.is_number_integer()) fail(ErrorKind::Parse, what + ": expected an integer, got " + v.dump());
    return v.get<std::int64_t>();
}

const json& field(const json& obj, const std::string& key) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(ErrorKind::Parse, "missing key '" + key + "'");
    return *it;
}

// A bare integer is read as a 1x1 matrix.
IntMatrix parse_matrix(const json& v, const std::string& what) {
    if (v.is_number_integer()) return IntMatrix::scalar(v.get<std::int64_t>());
    if (!v.is_array() || v.empty()) fail(ErrorKind::Parse, what + ": expected a nested integer array");
    std::vector<IntVec> rows;
    for (const auto& row : v) {
        if (!row.is_array()) fail(ErrorKind::Parse, what + ": rows must be arrays");
        IntVec r;
        for (const auto& x : row) r.push_back(as_int(x, what));
        if (!rows.empty() && r.size() != rows.front().size()) fail(ErrorKind::Parse, what + ": ragged rows");
        rows.push_back(std::move(r));
    }
    return IntMatrix::from_rows(rows);
}

// Elements may be written as integers when the dimension is 1.
IntVectorSet parse_set(const json& v, std::size_t dim, const std::string& what) {
    if (!v.is_array() || v.empty()) fail(ErrorKind::Parse, what + ": expected a non-empty array");
    std::vector<IntVec> pts;
    for (const auto& p : v) {
        if (p.is_number_integer()) {
            pts.push_back({p.get<std::int64_t>()});
        } else if (p.is_array()) {
            IntVec q;
            for (const auto& x : p) q.push_back(as_int(x, what));
            pts.push_back(std::move(q));
        } else {
            fail(ErrorKind::Parse, what + ": malformed element " + p.dump());
        }
        if (pts.back().size() != dim)
            fail(ErrorKind::Parse, what + ": element " + p.dump() + " has dimension " + std::to_string(pts.back().size()) +
                                       ", expected " + std::to_string(dim));
    }
    return IntVectorSet(dim, std::move(pts));
}

BigRational parse_rational_value(const json& v, const std::string& what) {
    if (v.is_number_integer()) return BigRational(v.get<std::int64_t>());
    if (v.is_string()) return parse_rational(v.get<std::string>());
    fail(ErrorKind::Parse, what + ": expected an integer or a \"p/q\" string");
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, sep)) out.push_back(cell);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

BigInt parse_int_cell(const std::string& s) {
    try {
        if (s.empty()) throw std::invalid_argument("empty");
        return BigInt(s);
    } catch (const std::exception&) {
        fail(ErrorKind::Parse, "malformed integer cell '" + s + "'");
    }
}

}  // namespace

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Parse, "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Parse, "cannot write '" + path.string() + "'");
    out << text;
}

SystemConfig parse_system(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::Parse, std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) fail(ErrorKind::Parse, "system file must hold a JSON object");
    if (doc.contains("R1")) {
        QuasiProductConfig cfg;
        auto& q = cfg.qps;
        q.R1 = parse_matrix(field(doc, "R1"), "R1");
        q.G1 = parse_matrix(field(doc, "G1"), "G1");
        q.C0 = parse_matrix(field(doc, "C0"), "C0");
        const std::size_t r = q.R1.rows(), s = q.G1.rows();
        q.base_digits = parse_set(field(doc, "base_digits"), r, "base_digits");
        const auto& table = field(doc, "digit_table");
        if (!table.is_array() || table.size() != q.base_digits.size())
            fail(ErrorKind::Parse, "digit_table must hold one fiber digit set per base digit");
        for (std::size_t i = 0; i < table.size(); ++i)
            q.digit_table.push_back(parse_set(table[i], s, "digit_table[" + std::to_string(i) + "]"));
        const auto& lat = field(doc, "fiber_lattice");
        if (lat.is_array() && !lat.empty() && !lat.front().is_array()) {
            if (s != 1) fail(ErrorKind::Parse, "fiber_lattice must be a nested array");
            q.fiber_lattice = {{parse_rational_value(lat.front(), "fiber_lattice")}};
        } else if (lat.is_array()) {
            for (const auto& row : lat) {
                std::vector<BigRational> rr;
                for (const auto& x : row) rr.push_back(parse_rational_value(x, "fiber_lattice"));
                q.fiber_lattice.push_back(std::move(rr));
            }
        } else {
            q.fiber_lattice = {{parse_rational_value(lat, "fiber_lattice")}};
        }
        cfg.base_L = parse_set(field(doc, "base_L"), r, "base_L");
        q.validate();
        return cfg;
    }
    IntTriple t;
    t.R = parse_matrix(field(doc, "R"), "R");
    if (!t.R.is_square()) fail(ErrorKind::Parse, "R must be square");
    t.B = parse_set(field(doc, "B"), t.R.rows(), "B");
    t.L = parse_set(field(doc, "L"), t.R.rows(), "L");
    return t;
}

SystemConfig load_system(const std::filesystem::path& path) { return parse_system(read_text(path)); }

IntTriple load_triple(const std::filesystem::path& path) {
    auto cfg = load_system(path);
    if (auto* t = std::get_if<IntTriple>(&cfg)) return *t;
    fail(ErrorKind::Parse, "'" + path.string() + "' holds a quasi-product system, expected a triple");
}

std::string to_csv(const CsvTable& table) {
    std::string out;
    auto line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    line(table.header);
    for (const auto& r : table.rows) line(r);
    return out;
}

CsvTable parse_csv(const std::string& text) {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split(line, ',');
        if (first) {
            t.header = std::move(cells);
            first = false;
            continue;
        }
        if (cells.size() != t.header.size())
            fail(ErrorKind::Parse, "CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                                       std::to_string(t.header.size()));
        t.rows.push_back(std::move(cells));
    }
    if (first) fail(ErrorKind::Parse, "empty CSV");
    return t;
}

std::string format_vector(const BigVec& v) {
    std::string out = "(";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += v[i].str();
    }
    return out + ")";
}

std::vector<std::string> numbered(const std::string& stem, std::size_t d) {
    std::vector<std::string> out;
    for (std::size_t i = 1; i <= d; ++i) out.push_back(stem + "_" + std::to_string(i));
    return out;
}

CsvTable spectrum_table(const SpectrumLevels& spec) {
    const std::size_t d = spec.sys.dim();
    CsvTable t;
    t.header = {"level", "m"};
    for (const char* stem : {"lambda", "source", "translate"}) {
        auto cols = numbered(stem, d);
        t.header.insert(t.header.end(), cols.begin(), cols.end());
    }
    t.header.push_back("certificate");
    for (const auto& p : spec.points) {
        std::vector<std::string> row{std::to_string(p.level), std::to_string(spec.m_seq.at(p.level - 1))};
        for (const BigVec* v : {&p.lambda, &p.source, &p.translate})
            for (std::size_t i = 0; i < d; ++i) row.push_back(i < v->size() ? (*v)[i].str() : "0");
        row.push_back(p.certificate ? format_double(*p.certificate) : "");
        t.rows.push_back(std::move(row));
    }
    return t;
}

CsvTable sparse_table(const SparseProductResult& result) {
    CsvTable t;
    if (result.points.empty()) return t;
    const std::size_t d = result.points.front().point.size();
    t.header = numbered("point", d);
    auto cols = numbered("assembled", d);
    t.header.insert(t.header.end(), cols.begin(), cols.end());
    t.header.push_back("shell");
    t.header.push_back("copy");
    for (std::size_t n = 0; n < result.points.size(); ++n) {
        const auto& p = result.points[n];
        std::vector<std::string> row;
        for (const auto& x : p.point) row.push_back(x.str());
        for (const auto& x : result.assembled[n]) row.push_back(format_rational(x));
        row.push_back(std::to_string(p.shell));
        row.push_back(std::to_string(p.copy));
        t.rows.push_back(std::move(row));
    }
    return t;
}

LoadedSpectrum parse_spectrum_csv(const std::string& text) {
    const CsvTable t = parse_csv(text);
    std::vector<std::size_t> coord_cols;
    for (const char* stem : {"lambda_", "point_"}) {
        for (std::size_t i = 1;; ++i) {
            auto it = std::find(t.header.begin(), t.header.end(), stem + std::to_string(i));
            if (it == t.header.end()) break;
            coord_cols.push_back(static_cast<std::size_t>(it - t.header.begin()));
        }
        if (!coord_cols.empty()) break;
    }
    if (coord_cols.empty()) fail(ErrorKind::Parse, "spectrum CSV needs lambda_1.. or point_1.. columns");
    auto col = [&](const std::string& name) -> std::optional<std::size_t> {
        auto it = std::find(t.header.begin(), t.header.end(), name);
        if (it == t.header.end()) return std::nullopt;
        return static_cast<std::size_t>(it - t.header.begin());
    };
    const auto level_col = col("level"), m_col = col("m");
    LoadedSpectrum out;
    for (const auto& row : t.rows) {
        BigVec p;
        for (auto c : coord_cols) p.push_back(parse_int_cell(row[c]));
        out.points.push_back(std::move(p));
        if (level_col) out.levels.push_back(parse_int_cell(row[*level_col]).convert_to<unsigned>());
        if (m_col) out.m.push_back(parse_int_cell(row[*m_col]).convert_to<unsigned>());
    }
    return out;
}

LoadedSpectrum load_spectrum_csv(const std::filesystem::path& path) { return parse_spectrum_csv(read_text(path)); }

CsvTable ft_table(const std::vector<Frequency>& xis, const std::vector<FTValue>& values) {
    CsvTable t;
    const std::size_t d = xis.empty() ? 1 : xis.front().dim();
    t.header = numbered("xi", d);
    for (const char* c : {"re", "im", "abs", "depth", "tail_bound"}) t.header.push_back(c);
    for (std::size_t i = 0; i < xis.size(); ++i) {
        std::vector<std::string> row;
        for (const auto& c : xis[i].coords()) row.push_back(format_rational(c));
        row.push_back(format_double(values[i].value.real()));
        row.push_back(format_double(values[i].value.imag()));
        row.push_back(format_double(std::abs(values[i].value)));
        row.push_back(std::to_string(values[i].trunc_depth));
        row.push_back(format_double(values[i].tail_bound));
        t.rows.push_back(std::move(row));
    }
    return t;
}

CsvTable density_table(const DimensionEstimate& est, std::size_t d) {
    CsvTable t;
    t.header = {"h", "sup_count"};
    auto cols = numbered("center", d);
    t.header.insert(t.header.end(), cols.begin(), cols.end());
    t.header.push_back("density");
    t.header.push_back("estimate");
    const auto& p = est.profile;
    for (std::size_t i = 0; i < p.h_grid.size(); ++i) {
        std::vector<std::string> row{format_rational(p.h_grid[i]), std::to_string(p.sup_counts[i])};
        for (const auto& c : p.centers[i]) row.push_back(format_rational(c));
        row.push_back(format_double(p.densities[i]));
        row.push_back(format_double(est.estimate));
        t.rows.push_back(std::move(row));
    }
    return t;
}

CsvTable jp_table(const std::vector<JPProfile>& profiles) {
    CsvTable t;
    const std::size_t d = profiles.empty() ? 1 : profiles.front().xi.dim();
    t.header = numbered("xi", d);
    t.header.push_back("K");
    t.header.push_back("S_K");
    for (const auto& prof : profiles)
        for (std::size_t k = 0; k < prof.partial_sums.size(); ++k) {
            std::vector<std::string> row;
            for (const auto& c : prof.xi.coords()) row.push_back(format_rational(c));
            row.push_back(std::to_string(k + 1));
            row.push_back(format_double(prof.partial_sums[k]));
            t.rows.push_back(std::move(row));
        }
    return t;
}

CsvTable gram_csv(const PointSet& points, const std::vector<GramEntry>& entries) {
    CsvTable t;
    const std::size_t d = points.empty() ? 1 : points.front().size();
    t.header = numbered("lambda", d);
    auto cols = numbered("lambda_prime", d);
    t.header.insert(t.header.end(), cols.begin(), cols.end());
    t.header.push_back("abs_ft");
    for (const auto& e : entries) {
        std::vector<std::string> row;
        for (const auto& x : points[e.i]) row.push_back(x.str());
        for (const auto& x : points[e.j]) row.push_back(x.str());
        row.push_back(format_double(e.modulus));
        t.rows.push_back(std::move(row));
    }
    return t;
}

}  // namespace spectral_forge
