#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include <json.hpp>

#include "nisyn/lti.hpp"
#include "nisyn/synthesis.hpp"
#include "nisyn/verify.hpp"

namespace nisyn {

/// Parsed contents of a system file: the state-space matrices plus optional
/// metadata (name, gamma, synthesis options) and, when the file is a
/// synthesis artifact, the closed loop's certificate.
struct SystemFile {
    StateSpaceModel system;
    std::string name;
    std::optional<double> gamma;
    SynthesisOptions options;
    std::optional<Eigen::MatrixXd> certificate_Y;
};

/// Loads a plain system file {A, B, C, [D], [name], [gamma], [options]} or a
/// synthesis artifact (closed_loop + certificate_Y). Dimension-validated;
/// all numbers must be finite. Throws ParseError on malformed input.
SystemFile load_system_file(const std::string& path);
SystemFile parse_system_json(const nlohmann::json& j);

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& field);
nlohmann::json matrix_to_json(const Eigen::MatrixXd& M);
nlohmann::json matrix_to_json(const Eigen::MatrixXcd& M);  // [[re, im], ...] rows

nlohmann::json report_to_json(const VerificationReport& rep);
nlohmann::json options_to_json(const SynthesisOptions& opts);
SynthesisOptions options_from_json(const nlohmann::json& j);

/// Parses "0.5" or "[[a, b], [c, d]]" into a matrix option (scalar shorthand
/// means scalar * I at the use site).
MatrixSpec matrix_spec_from_string(const std::string& text);

/// Serializes JSON with every floating-point number printed to 17 significant
/// digits, so parsing the text back reproduces the doubles bit-exactly.
std::string dump_json_17(const nlohmann::json& j, int indent = 2);
void write_json_file(const std::string& path, const nlohmann::json& j);

}  // namespace nisyn
