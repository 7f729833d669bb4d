#include "lrcf/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace lrcf {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string next_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) {
    throw data_error(std::string("model file truncated: expected ") + what);
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

double parse_double(const std::string& token, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw data_error(std::string("model file: cannot parse ") + what + " '" + token + "'");
  }
}

} // namespace

void save_model(std::ostream& out, const CpdModel& model) {
  validate_model(model);
  out << "LRCF v1\n";
  out << model.num_vars << ' ' << model.rank << ' ' << model.harmonics << '\n';
  for (Index n = 0; n < model.scaling.dims(); ++n) {
    out << fmt(model.scaling.shift[n]) << ' ' << fmt(model.scaling.scale[n]) << '\n';
  }
  for (int h = 0; h < model.rank; ++h) {
    if (h) out << ' ';
    out << fmt(model.lambda[h]);
  }
  out << '\n';
  for (const CMatrix& factor : model.factors) {
    for (Index r = 0; r < factor.rows(); ++r) {
      for (int h = 0; h < model.rank; ++h) {
        if (h) out << ' ';
        out << fmt(factor(r, h).real()) << ',' << fmt(factor(r, h).imag());
      }
      out << '\n';
    }
  }
}

void save_model(const std::string& path, const CpdModel& model) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write '" + path + "'");
  save_model(out, model);
}

CpdModel load_model(std::istream& in) {
  if (next_line(in, "header") != "LRCF v1") {
    throw data_error("model file: missing 'LRCF v1' header");
  }
  CpdModel model;
  {
    std::istringstream dims(next_line(in, "dimensions"));
    if (!(dims >> model.num_vars >> model.rank >> model.harmonics)) {
      throw data_error("model file: malformed dimension line");
    }
  }
  if (model.num_vars < 1 || model.rank < 1 || model.harmonics < 0) {
    throw data_error("model file: dimensions out of range");
  }
  model.scaling.shift.resize(model.num_vars);
  model.scaling.scale.resize(model.num_vars);
  for (int n = 0; n < model.num_vars; ++n) {
    std::istringstream line(next_line(in, "scaling record"));
    std::string a, b;
    if (!(line >> a >> b)) throw data_error("model file: malformed scaling line");
    model.scaling.shift[n] = parse_double(a, "shift");
    model.scaling.scale[n] = parse_double(b, "scale");
    if (!(model.scaling.scale[n] > 0.0)) throw data_error("model file: scale must be positive");
  }
  {
    std::istringstream line(next_line(in, "mixture weights"));
    model.lambda.resize(model.rank);
    for (int h = 0; h < model.rank; ++h) {
      std::string tok;
      if (!(line >> tok)) throw data_error("model file: too few mixture weights");
      model.lambda[h] = parse_double(tok, "mixture weight");
    }
  }
  const Index dim = model.freq_dim();
  model.factors.reserve(static_cast<std::size_t>(model.num_vars));
  for (int n = 0; n < model.num_vars; ++n) {
    CMatrix factor(dim, model.rank);
    for (Index r = 0; r < dim; ++r) {
      std::istringstream line(next_line(in, "factor row"));
      for (int h = 0; h < model.rank; ++h) {
        std::string tok;
        if (!(line >> tok)) throw data_error("model file: too few factor entries");
        const std::size_t comma = tok.find(',');
        if (comma == std::string::npos) {
          throw data_error("model file: factor entry '" + tok + "' is not 're,im'");
        }
        factor(r, h) = Complex(parse_double(tok.substr(0, comma), "factor real part"),
                               parse_double(tok.substr(comma + 1), "factor imaginary part"));
      }
    }
    model.factors.push_back(std::move(factor));
  }
  validate_model(model);
  return model;
}

CpdModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open '" + path + "'");
  return load_model(in);
}

} // namespace lrcf
