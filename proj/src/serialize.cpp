#include "rkhm/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rkhm {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

json cplx_to_json(cplx v) { return json::array({v.real(), v.imag()}); }

cplx cplx_from_json(const json& j) {
  require(j.is_array() && j.size() == 2, "expected [re, im] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

json cmat_to_json(const Eigen::MatrixXcd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(cplx_to_json(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXcd cmat_from_json(const json& j, int rows, int cols) {
  require(j.is_array() && static_cast<int>(j.size()) == rows, "matrix row count mismatch");
  Eigen::MatrixXcd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    require(j[i].is_array() && static_cast<int>(j[i].size()) == cols,
            "matrix column count mismatch");
    for (int c = 0; c < cols; ++c) m(i, c) = cplx_from_json(j[i][c]);
  }
  return m;
}

Eigen::MatrixXd dmat_from_json(const json& j, const char* field) {
  require(j.is_array() && !j.empty(), std::string("bad field: ") + field);
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    require(j[i].is_array() && static_cast<int>(j[i].size()) == cols,
            std::string("ragged rows in field: ") + field);
    for (int c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

} // namespace

json descriptor_to_json(const Descriptor& d) {
  json j;
  switch (d->kind) {
    case AlgebraKind::Scalar:
      j["kind"] = "scalar";
      break;
    case AlgebraKind::Matrix:
      j["kind"] = "matrix";
      j["dim"] = d->dim;
      break;
    case AlgebraKind::Function:
      j["kind"] = "function";
      j["basis"] = d->basis == FunctionBasis::Polynomial ? "polynomial" : "fourier";
      j["order"] = d->order;
      j["grid"] = d->grid_count();
      break;
    case AlgebraKind::IntegralOperator:
      j["kind"] = "integral_operator";
      j["order"] = d->order;
      j["grid"] = d->grid_count();
      break;
  }
  return j;
}

Descriptor descriptor_from_json(const json& j) {
  require(j.contains("kind"), "missing field: kind");
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "scalar") return scalar_algebra();
  if (kind == "matrix") {
    require(j.contains("dim"), "missing field: dim");
    return matrix_algebra(j["dim"].get<int>());
  }
  if (kind == "function") {
    FunctionBasis b = FunctionBasis::Polynomial;
    if (j.contains("basis")) {
      const std::string s = j["basis"].get<std::string>();
      require(s == "polynomial" || s == "fourier", "bad field: basis");
      if (s == "fourier") b = FunctionBasis::Fourier;
    }
    int order = j.value("order", 10);
    int grid = j.value("grid", 0);
    return function_algebra(b, order, grid);
  }
  if (kind == "integral_operator") {
    int order = j.value("order", 5);
    int grid = j.value("grid", 0);
    return operator_algebra(order, grid);
  }
  throw std::invalid_argument("bad field: kind");
}

json element_to_json(const AlgebraElement& a) {
  json j;
  switch (a.desc->kind) {
    case AlgebraKind::Scalar:
      j["scalar"] = cplx_to_json(a.s);
      break;
    case AlgebraKind::Matrix:
      j["matrix"] = cmat_to_json(a.m);
      break;
    case AlgebraKind::Function:
      j["coeffs"] = cmat_to_json(a.m);
      break;
    case AlgebraKind::IntegralOperator:
      j["alpha"] = cplx_to_json(a.alpha);
      j["kernel"] = cmat_to_json(a.m);
      break;
  }
  return j;
}

AlgebraElement element_from_json(const Descriptor& d, const json& j) {
  AlgebraElement a = zero(d);
  switch (d->kind) {
    case AlgebraKind::Scalar:
      require(j.contains("scalar"), "missing field: scalar");
      a.s = cplx_from_json(j["scalar"]);
      break;
    case AlgebraKind::Matrix:
      require(j.contains("matrix"), "missing field: matrix");
      a.m = cmat_from_json(j["matrix"], d->dim, d->dim);
      break;
    case AlgebraKind::Function:
      require(j.contains("coeffs"), "missing field: coeffs");
      a.m = cmat_from_json(j["coeffs"], d->coeff_count(), 1);
      break;
    case AlgebraKind::IntegralOperator:
      require(j.contains("kernel"), "missing field: kernel");
      a.alpha = j.contains("alpha") ? cplx_from_json(j["alpha"]) : cplx(0.0, 0.0);
      a.m = cmat_from_json(j["kernel"], d->coeff_count(), d->coeff_count());
      break;
  }
  return a;
}

json module_vector_to_json(const ModuleVector& u) {
  json j = json::array();
  for (const auto& e : u.entries) j.push_back(element_to_json(e));
  return j;
}

ModuleVector module_vector_from_json(const Descriptor& d, const json& j) {
  require(j.is_array() && !j.empty(), "module vector must be a non-empty array");
  ModuleVector u = mv_zero(d, static_cast<int>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) u.entries[i] = element_from_json(d, j[i]);
  return u;
}

json operator_matrix_to_json(const OperatorMatrix& a) {
  json j;
  j["rows"] = a.rows;
  j["cols"] = a.cols;
  j["hermitian"] = a.hermitian_flag;
  json data = json::array();
  for (const auto& e : a.data) data.push_back(element_to_json(e));
  j["data"] = data;
  return j;
}

OperatorMatrix operator_matrix_from_json(const Descriptor& d, const json& j) {
  require(j.contains("rows") && j.contains("cols") && j.contains("data"),
          "missing operator matrix fields");
  OperatorMatrix a = om_zero(d, j["rows"].get<int>(), j["cols"].get<int>());
  const json& data = j["data"];
  require(data.is_array() && data.size() == a.data.size(), "operator matrix size mismatch");
  for (size_t i = 0; i < a.data.size(); ++i) a.data[i] = element_from_json(d, data[i]);
  a.hermitian_flag = j.value("hermitian", false);
  return a;
}

json qr_to_json(const QrResult& qr) {
  json j;
  j["R"] = operator_matrix_to_json(qr.R);
  j["R_inv"] = operator_matrix_to_json(qr.R_inv);
  j["kept"] = qr.kept;
  j["epsilon"] = qr.epsilon;
  return j;
}

QrResult qr_from_json(const Descriptor& d, const json& j) {
  QrResult qr;
  qr.R = operator_matrix_from_json(d, j.at("R"));
  qr.R_inv = operator_matrix_from_json(d, j.at("R_inv"));
  qr.kept = j.at("kept").get<std::vector<bool>>();
  qr.epsilon = j.at("epsilon").get<double>();
  return qr;
}

json pca_model_to_json(const PcaModel& m) {
  json j;
  j["descriptor"] = descriptor_to_json(m.gram.desc);
  json axes = json::array();
  for (const auto& c : m.coeffs) axes.push_back(module_vector_to_json(c));
  j["coeffs"] = axes;
  json traces = json::array();
  for (const auto& tr : m.objective_trace) {
    json one = json::array();
    for (const auto& e : tr) one.push_back(element_to_json(e));
    traces.push_back(one);
  }
  j["objective_trace"] = traces;
  if (m.eigenvalues.size() > 0) {
    json ev = json::array();
    for (int i = 0; i < m.eigenvalues.size(); ++i) ev.push_back(m.eigenvalues(i));
    j["eigenvalues"] = ev;
  }
  return j;
}

json sample_to_json(const Sample& s) {
  json j;
  switch (s.form) {
    case Sample::Form::Point: {
      j["form"] = "point";
      json v = json::array();
      for (int i = 0; i < s.point.size(); ++i) v.push_back(cplx_to_json(s.point(i)));
      j["values"] = v;
      break;
    }
    case Sample::Form::UnivariateFn: {
      j["form"] = "univariate";
      json rows = json::array();
      for (int c = 0; c < s.uni.rows(); ++c) {
        json row = json::array();
        for (int k = 0; k < s.uni.cols(); ++k) row.push_back(s.uni(c, k));
        rows.push_back(row);
      }
      j["coeffs"] = rows;
      break;
    }
    case Sample::Form::BivariateFn: {
      j["form"] = "bivariate";
      json rows = json::array();
      for (int a = 0; a < s.bi.rows(); ++a) {
        json row = json::array();
        for (int b = 0; b < s.bi.cols(); ++b) row.push_back(s.bi(a, b));
        rows.push_back(row);
      }
      j["coeffs"] = rows;
      break;
    }
    case Sample::Form::GridFn: {
      j["form"] = "grid";
      json v = json::array();
      for (int i = 0; i < s.grid.size(); ++i) v.push_back(s.grid(i));
      j["values"] = v;
      break;
    }
  }
  return j;
}

Sample sample_from_json(const json& j) {
  require(j.contains("form"), "missing field: form");
  const std::string form = j["form"].get<std::string>();
  if (form == "point") {
    const json& v = j.at("values");
    Eigen::VectorXcd x(v.size());
    for (size_t i = 0; i < v.size(); ++i)
      x(static_cast<int>(i)) = v[i].is_array() ? cplx_from_json(v[i]) : cplx(v[i].get<double>(), 0);
    return point_sample_c(x);
  }
  if (form == "univariate") return univariate_sample(dmat_from_json(j.at("coeffs"), "coeffs"));
  if (form == "bivariate") return bivariate_sample(dmat_from_json(j.at("coeffs"), "coeffs"));
  if (form == "grid") {
    const json& v = j.at("values");
    Eigen::VectorXd x(v.size());
    for (size_t i = 0; i < v.size(); ++i) x(static_cast<int>(i)) = v[i].get<double>();
    return grid_sample(x);
  }
  throw std::invalid_argument("bad field: form");
}

std::vector<Sample> load_samples_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open: " + path);
  std::vector<Sample> out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string tok;
    bool numeric = true;
    while (std::getline(ss, tok, ',')) {
      try {
        size_t pos = 0;
        vals.push_back(std::stod(tok, &pos));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (first && !numeric) {
      first = false;
      continue; // header row
    }
    first = false;
    require(numeric && !vals.empty(), "non-numeric row in " + path);
    Eigen::VectorXd v(static_cast<int>(vals.size()));
    for (size_t i = 0; i < vals.size(); ++i) v(static_cast<int>(i)) = vals[i];
    out.push_back(grid_sample(v));
  }
  return out;
}

std::vector<Sample> load_samples_json(const std::string& path) {
  json j = json::parse(read_file(path));
  const json& arr = j.is_array() ? j : j.at("samples");
  std::vector<Sample> out;
  for (const auto& s : arr) out.push_back(sample_from_json(s));
  return out;
}

ScalarKernel scalar_kernel_from_json(const json& j) {
  ScalarKernel k;
  if (j.contains("type")) {
    const std::string t = j["type"].get<std::string>();
    require(t == "gaussian" || t == "laplacian", "bad field: type");
    k.base = t == "gaussian" ? ScalarKernel::Base::Gaussian : ScalarKernel::Base::Laplacian;
  }
  k.gamma = j.value("gamma", 1.0);
  require(k.gamma > 0, "bad field: gamma");
  return k;
}

KernelSpec kernel_spec_from_json(const json& j, const Descriptor& target) {
  KernelSpec spec;
  spec.target = target;
  require(j.contains("variant"), "missing field: variant");
  const std::string v = j["variant"].get<std::string>();
  if (v == "scalar_identity")
    spec.variant = KernelSpec::Variant::ScalarTimesIdentity;
  else if (v == "functional_moment")
    spec.variant = KernelSpec::Variant::FunctionalMoment;
  else if (v == "pointwise")
    spec.variant = KernelSpec::Variant::PointwiseFunction;
  else if (v == "diagonal")
    spec.variant = KernelSpec::Variant::DiagonalMatrix;
  else if (v == "integral_operator")
    spec.variant = KernelSpec::Variant::IntegralOperatorKernel;
  else if (v == "quantum")
    spec.variant = KernelSpec::Variant::QuantumState;
  else
    throw std::invalid_argument("bad field: variant");

  if (j.contains("base")) spec.base = scalar_kernel_from_json(j["base"]);
  if (j.contains("diag"))
    for (const auto& dk : j["diag"]) spec.diag.push_back(scalar_kernel_from_json(dk));
  if (j.contains("input_weights")) {
    const json& w = j["input_weights"];
    spec.input_weights.resize(w.size());
    for (size_t i = 0; i < w.size(); ++i) spec.input_weights(static_cast<int>(i)) = w[i].get<double>();
  }
  return spec;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17e", v);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& headers,
               const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (size_t i = 0; i < headers.size(); ++i) {
    if (i) out += ',';
    out += headers[i];
  }
  out += '\n';
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_double(row[i]);
    }
    out += '\n';
  }
  write_file(path, out);
}

uint64_t fnv1a64(const std::string& bytes) {
  uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out.good()) throw std::runtime_error("cannot write: " + path);
  out << content;
  if (!out.good()) throw std::runtime_error("cannot write: " + path);
}

} // namespace rkhm
