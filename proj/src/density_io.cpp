#include "hlphase/density_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hlphase/error.hpp"

namespace hlphase {

namespace {

using nlohmann::json;

CMatrix::Index read_rows(const json& part, const char* key, std::size_t dim, CMatrix& out, bool imaginary) {
    if (!part.is_array() || part.size() != dim) {
        throw ValidationError("schema", std::string("\"") + key + "\" must be a " + std::to_string(dim) + "x" +
                                            std::to_string(dim) + " array");
    }
    for (std::size_t i = 0; i < dim; ++i) {
        const json& row = part[i];
        if (!row.is_array() || row.size() != dim) {
            throw ValidationError("schema", std::string("\"") + key + "\" row " + std::to_string(i) +
                                                " must have " + std::to_string(dim) + " entries");
        }
        for (std::size_t j = 0; j < dim; ++j) {
            if (!row[j].is_number()) {
                throw ValidationError("schema", std::string("\"") + key + "\" entries must be numbers");
            }
            const double v = row[j].get<double>();
            auto& z = out(static_cast<CMatrix::Index>(i), static_cast<CMatrix::Index>(j));
            z = imaginary ? Complex(z.real(), v) : Complex(v, z.imag());
        }
    }
    return static_cast<CMatrix::Index>(dim);
}

}  // namespace

DensityMatrix parse_density_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError("schema", std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ValidationError("schema", "top level must be an object");
    for (const char* key : {"num_qubits", "real", "imag"}) {
        if (!doc.contains(key)) throw ValidationError("schema", std::string("missing field \"") + key + "\"");
    }
    if (!doc["num_qubits"].is_number_integer()) throw ValidationError("schema", "\"num_qubits\" must be an integer");
    const int n = doc["num_qubits"].get<int>();
    if (n < 1 || n > kMaxQubits) {
        throw ValidationError("dimension", "num_qubits must lie in 1.." + std::to_string(kMaxQubits));
    }
    const std::size_t dim = std::size_t{1} << n;
    CMatrix m = CMatrix::Zero(static_cast<CMatrix::Index>(dim), static_cast<CMatrix::Index>(dim));
    read_rows(doc["real"], "real", dim, m, false);
    read_rows(doc["imag"], "imag", dim, m, true);
    return DensityMatrix::from_matrix(std::move(m));
}

DensityMatrix load_density_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open density matrix file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_density_json(buf.str());
}

std::string density_to_json(const DensityMatrix& rho) {
    json re = json::array(), im = json::array();
    for (std::size_t i = 0; i < rho.dimension(); ++i) {
        json rrow = json::array(), irow = json::array();
        for (std::size_t j = 0; j < rho.dimension(); ++j) {
            rrow.push_back(rho(i, j).real());
            irow.push_back(rho(i, j).imag());
        }
        re.push_back(std::move(rrow));
        im.push_back(std::move(irow));
    }
    json doc = {{"num_qubits", rho.num_qubits()}, {"real", std::move(re)}, {"imag", std::move(im)}};
    return doc.dump(2);
}

}  // namespace hlphase
