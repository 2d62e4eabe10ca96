#pragma once

#include "rkhm/kme.hpp"
#include "rkhm/koopman.hpp"

#include <json.hpp>

#include <string>

namespace rkhm {

using json = nlohmann::json;

json descriptor_to_json(const Descriptor& d);
Descriptor descriptor_from_json(const json& j);

// complex numbers as [re, im]; matrix payloads row-major
json element_to_json(const AlgebraElement& a);
AlgebraElement element_from_json(const Descriptor& d, const json& j);

json module_vector_to_json(const ModuleVector& u);
ModuleVector module_vector_from_json(const Descriptor& d, const json& j);

json operator_matrix_to_json(const OperatorMatrix& a);
OperatorMatrix operator_matrix_from_json(const Descriptor& d, const json& j);

json qr_to_json(const QrResult& qr);
QrResult qr_from_json(const Descriptor& d, const json& j);

json pca_model_to_json(const PcaModel& m);

json sample_to_json(const Sample& s);
Sample sample_from_json(const json& j);

// one row per sample, columns = grid values; an initial non-numeric row is
// treated as a header and skipped
std::vector<Sample> load_samples_csv(const std::string& path);
std::vector<Sample> load_samples_json(const std::string& path);

ScalarKernel scalar_kernel_from_json(const json& j);
KernelSpec kernel_spec_from_json(const json& j, const Descriptor& target);

// full-precision scientific notation, deterministic across runs
std::string format_double(double v);
void write_csv(const std::string& path, const std::vector<std::string>& headers,
               const std::vector<std::vector<double>>& rows);

uint64_t fnv1a64(const std::string& bytes);
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

} // namespace rkhm
