#include "nisyn/system_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nisyn/errors.hpp"

namespace nisyn {

using nlohmann::json;

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& field)
{
    if (!j.is_array()) throw ParseError("field '" + field + "': expected a nested array");
    const auto rows = static_cast<Eigen::Index>(j.size());
    if (rows == 0) return Eigen::MatrixXd(0, 0);

    Eigen::Index cols = -1;
    for (const auto& row : j) {
        if (!row.is_array()) {
            throw ParseError("field '" + field + "': each row must be an array of numbers");
        }
        if (cols < 0) cols = static_cast<Eigen::Index>(row.size());
        if (static_cast<Eigen::Index>(row.size()) != cols) {
            throw ParseError("field '" + field + "': ragged rows");
        }
    }
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            const auto& v = j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
            if (!v.is_number()) {
                throw ParseError("field '" + field + "': row " + std::to_string(r) +
                                 " contains a non-numeric entry");
            }
            const double x = v.get<double>();
            if (!std::isfinite(x)) {
                throw ParseError("field '" + field + "': non-finite entry at row " +
                                 std::to_string(r));
            }
            M(r, c) = x;
        }
    }
    return M;
}

json matrix_to_json(const Eigen::MatrixXd& M)
{
    json rows = json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

json matrix_to_json(const Eigen::MatrixXcd& M)
{
    json rows = json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < M.cols(); ++c) {
            row.push_back(json::array({M(r, c).real(), M(r, c).imag()}));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

MatrixSpec matrix_spec_from_json(const json& j, const std::string& field)
{
    if (j.is_number()) return MatrixSpec::from_scalar(j.get<double>());
    if (j.is_array()) return MatrixSpec::from_matrix(matrix_from_json(j, field));
    throw ParseError("option '" + field + "': expected a scalar or a nested array");
}

json matrix_spec_to_json(const MatrixSpec& spec)
{
    if (spec.matrix) return matrix_to_json(*spec.matrix);
    if (spec.scalar) return *spec.scalar;
    return nullptr;
}

}  // namespace

MatrixSpec matrix_spec_from_string(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("matrix option: ") + e.what());
    }
    return matrix_spec_from_json(j, "option");
}

SynthesisOptions options_from_json(const json& j)
{
    if (!j.is_object()) throw ParseError("options: expected an object");
    SynthesisOptions opts;
    for (const auto& [key, value] : j.items()) {
        if (key == "Qb") {
            opts.Qb = matrix_spec_from_json(value, key);
        } else if (key == "Y1b") {
            opts.Y1b = matrix_spec_from_json(value, key);
        } else if (key == "Y2") {
            opts.Y2 = matrix_spec_from_json(value, key);
        } else if (key == "K3") {
            opts.K3 = matrix_spec_from_json(value, key);
        } else if (key == "y1a") {
            if (!value.is_number()) throw ParseError("option 'y1a': expected a scalar");
            opts.y1a = value.get<double>();
        } else if (key == "Hb") {
            if (!value.is_string()) {
                throw ParseError("option 'Hb': expected \"zero\", \"zero-first\" or \"random\"");
            }
            const std::string s = value.get<std::string>();
            if (s == "zero") {
                opts.hb_strategy = HbStrategy::ZeroOnly;
            } else if (s == "zero-first") {
                opts.hb_strategy = HbStrategy::ZeroFirst;
            } else if (s == "random") {
                opts.hb_strategy = HbStrategy::RandomOnly;
            } else {
                throw ParseError("option 'Hb': unknown strategy '" + s + "'");
            }
        } else if (key == "seed") {
            if (!value.is_number_integer()) throw ParseError("option 'seed': expected an integer");
            opts.seed = value.get<std::uint64_t>();
        } else if (key == "max_tries") {
            if (!value.is_number_integer()) {
                throw ParseError("option 'max_tries': expected an integer");
            }
            opts.max_tries = value.get<int>();
        } else {
            throw ParseError("options: unknown key '" + key + "'");
        }
    }
    return opts;
}

json options_to_json(const SynthesisOptions& opts)
{
    json j = json::object();
    if (opts.Qb.set()) j["Qb"] = matrix_spec_to_json(opts.Qb);
    if (opts.Y1b.set()) j["Y1b"] = matrix_spec_to_json(opts.Y1b);
    if (opts.Y2.set()) j["Y2"] = matrix_spec_to_json(opts.Y2);
    if (opts.K3.set()) j["K3"] = matrix_spec_to_json(opts.K3);
    j["y1a"] = opts.y1a;
    switch (opts.hb_strategy) {
        case HbStrategy::ZeroFirst: j["Hb"] = "zero-first"; break;
        case HbStrategy::RandomOnly: j["Hb"] = "random"; break;
        case HbStrategy::ZeroOnly: j["Hb"] = "zero"; break;
    }
    j["seed"] = opts.seed;
    j["max_tries"] = opts.max_tries;
    return j;
}

SystemFile parse_system_json(const json& j)
{
    if (!j.is_object()) throw ParseError("system file: expected a JSON object");
    SystemFile file;

    const json* sys_obj = &j;
    if (j.contains("closed_loop")) {
        sys_obj = &j.at("closed_loop");
        if (!sys_obj->is_object()) throw ParseError("field 'closed_loop': expected an object");
        if (j.contains("certificate_Y")) {
            file.certificate_Y = matrix_from_json(j.at("certificate_Y"), "certificate_Y");
        }
    }

    for (const char* required : {"A", "B", "C"}) {
        if (!sys_obj->contains(required)) {
            throw ParseError(std::string("system file: missing field '") + required + "'");
        }
    }
    const Eigen::MatrixXd A = matrix_from_json(sys_obj->at("A"), "A");
    const Eigen::MatrixXd B = matrix_from_json(sys_obj->at("B"), "B");
    const Eigen::MatrixXd C = matrix_from_json(sys_obj->at("C"), "C");
    try {
        if (sys_obj->contains("D")) {
            file.system = StateSpaceModel(A, B, C, matrix_from_json(sys_obj->at("D"), "D"));
        } else {
            file.system = StateSpaceModel(A, B, C);
        }
    } catch (const DimensionError& e) {
        throw ParseError(std::string("system file: ") + e.what());
    }

    if (j.contains("name")) {
        if (!j.at("name").is_string()) throw ParseError("field 'name': expected a string");
        file.name = j.at("name").get<std::string>();
    }
    if (j.contains("gamma")) {
        if (!j.at("gamma").is_number()) throw ParseError("field 'gamma': expected a number");
        file.gamma = j.at("gamma").get<double>();
        if (!std::isfinite(*file.gamma)) throw ParseError("field 'gamma': must be finite");
    }
    if (j.contains("options")) file.options = options_from_json(j.at("options"));
    return file;
}

SystemFile load_system_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open system file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ParseError("system file '" + path + "': " + e.what());
    }
    return parse_system_json(j);
}

json report_to_json(const VerificationReport& rep)
{
    json checks = json::array();
    for (const auto& c : rep.checks) {
        checks.push_back({{"name", c.name},
                          {"measured", c.measured},
                          {"threshold", c.threshold},
                          {"passed", c.passed}});
    }
    return {{"passed", rep.passed}, {"checks", checks}, {"pole_warnings", rep.pole_warnings}};
}

namespace {

void dump17_value(const json& j, std::string& out, int indent, int depth)
{
    const std::string pad(static_cast<std::size_t>(indent * depth), ' ');
    const std::string pad_in(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (const auto& [key, value] : j.items()) {
                if (!first) out += ",\n";
                first = false;
                out += pad_in;
                out += json(key).dump();
                out += ": ";
                dump17_value(value, out, indent, depth + 1);
            }
            out += "\n" + pad + "}";
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            bool first = true;
            for (const auto& value : j) {
                if (!first) out += ",\n";
                first = false;
                out += pad_in;
                dump17_value(value, out, indent, depth + 1);
            }
            out += "\n" + pad + "]";
            return;
        }
        case json::value_t::number_float: {
            const double v = j.get<double>();
            if (!std::isfinite(v)) throw NumericalError("dump_json_17: non-finite number");
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out += buf;
            return;
        }
        default:
            out += j.dump();
            return;
    }
}

}  // namespace

std::string dump_json_17(const json& j, int indent)
{
    std::string out;
    dump17_value(j, out, indent, 0);
    out += "\n";
    return out;
}

void write_json_file(const std::string& path, const json& j)
{
    std::ofstream out(path);
    if (!out) throw Error("cannot open output file '" + path + "'");
    out << dump_json_17(j);
}

}  // namespace nisyn
