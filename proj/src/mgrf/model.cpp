#include "mgrf/model.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "mgrf/error.hpp"
#include "mgrf/filterbank.hpp"
#include "mgrf/gibbs.hpp"

namespace mgrf {

Potential make_potential(const FeatureKind& kind, OffsetList offsets, int iteration) {
  Potential p;
  p.kind = kind;
  if (kind.tag == FeatureTag::FilterHist)
    p.offsets = filter_offsets(filter_bank().at(static_cast<std::size_t>(kind.filter_index)));
  else
    p.offsets = std::move(offsets);
  p.theta.assign(static_cast<std::size_t>(kind.bins), 0.0);
  p.iteration = iteration;
  return p;
}

namespace {

int expected_bins(const FeatureKind& k) {
  switch (k.tag) {
    case FeatureTag::Marginal: return k.levels;
    case FeatureTag::GLC: return static_cast<int>(std::pow(k.levels, k.order));
    case FeatureTag::GLD: return 2 * k.levels - 1;
    case FeatureTag::BP:
    case FeatureTag::BE: return 1 << (k.order - 1);
    case FeatureTag::FilterHist: return kFilterInnerBins + 2;
  }
  return -1;
}

}  // namespace

void validate_potential(int levels, const Potential& p) {
  const auto& k = p.kind;
  require(k.levels == levels, "potential level count does not match the model");
  require(!p.offsets.empty() && p.offsets.front() == Offset{}, "offset list must start at (0,0)");
  if (k.tag == FeatureTag::FilterHist) {
    require(k.filter_index >= 0 && k.filter_index < static_cast<int>(filter_bank().size()),
            "filter index out of range");
    require(p.offsets == filter_offsets(filter_bank()[static_cast<std::size_t>(k.filter_index)]),
            "filter potential offsets must be the filter footprint");
  } else {
    require(static_cast<int>(p.offsets.size()) == k.order, "offset count does not match feature order");
    if (k.tag == FeatureTag::Marginal) require(k.order == 1, "marginal features have order 1");
    if (k.tag == FeatureTag::GLD) require(k.order == 2, "GLD features have order 2");
    if (k.tag == FeatureTag::BP || k.tag == FeatureTag::BE)
      require(k.order >= 2 && k.order <= 21, "binary pattern order must be in [2, 21]");
  }
  require(k.bins == expected_bins(k), "bin count does not match feature kind");
  require(p.theta.size() == static_cast<std::size_t>(k.bins), "theta length does not match bin count");
  for (double t : p.theta) require(std::isfinite(t), "theta must be finite");
  if (!p.target.freq.empty()) require(p.target.freq.size() == p.theta.size(), "target histogram length mismatch");
}

NestedModel add_potential(const NestedModel& model, Potential p) {
  validate_potential(model.levels, p);
  NestedModel out = model;
  out.potentials.push_back(std::move(p));
  return out;
}

bool has_potential(const NestedModel& model, const FeatureKind& kind, const OffsetList& offsets) {
  for (const auto& p : model.potentials)
    if (p.kind == kind && p.offsets == offsets) return true;
  return false;
}

NestedModel base_model(int levels, bool with_marginal) {
  NestedModel m;
  m.levels = levels;
  if (with_marginal) m.potentials.push_back(make_potential(FeatureKind::marginal(levels), {{0, 0}}));
  m.potentials.push_back(make_potential(FeatureKind::gld(levels), {{0, 0}, {1, 0}}));
  m.potentials.push_back(make_potential(FeatureKind::gld(levels), {{0, 0}, {0, 1}}));
  return m;
}

std::vector<HistogramStats> model_histograms(const NestedModel& model, const GreyImage& img) {
  std::vector<HistogramStats> out;
  for (const auto& p : model.potentials) out.push_back(collect_histogram(p.kind, p.offsets, img));
  return out;
}

double energy(const NestedModel& model, const GreyImage& img) {
  require(img.levels() == model.levels, "image level count does not match the model");
  double e = 0.0;
  for (const auto& p : model.potentials) {
    const auto counts = count_histogram(p.kind, p.offsets, img);
    for (std::size_t b = 0; b < counts.size(); ++b) e += p.theta[b] * static_cast<double>(counts[b]);
  }
  return e;
}

double normalized_energy(const NestedModel& model, const GreyImage& img) {
  require(img.levels() == model.levels, "image level count does not match the model");
  double e = 0.0;
  for (const auto& p : model.potentials) {
    const auto h = collect_histogram(p.kind, p.offsets, img);
    for (std::size_t b = 0; b < h.freq.size(); ++b) e += p.theta[b] * h.freq[b];
  }
  return e;
}

std::vector<double> local_conditional(const NestedModel& model, const GreyImage& img, int x, int y) {
  require(img.contains(x, y), "local_conditional: site outside the lattice");
  GibbsState state(model, img);
  std::vector<double> prob(static_cast<std::size_t>(model.levels));
  state.conditional(x, y, prob);
  return prob;
}

int max_clique_radius(const NestedModel& model) {
  int r = 0;
  for (const auto& p : model.potentials) r = std::max(r, CliqueExtent::of(p.offsets).radius());
  return r;
}

// ---------------------------------------------------------------------------
// Text format

namespace {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& tok) {
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
    fail(ErrorKind::Format, "malformed number '" + tok + "'");
  return v;
}

long parse_long(const std::string& tok) {
  long v = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
    fail(ErrorKind::Format, "malformed integer '" + tok + "'");
  return v;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += format_double(v[i]);
  }
  return s;
}

// Splits "key=value" tokens of a potential header line.
std::string field(const std::vector<std::string>& toks, const std::string& key, bool required, int line) {
  for (const auto& t : toks)
    if (t.size() > key.size() && t.compare(0, key.size(), key) == 0 && t[key.size()] == '=')
      return t.substr(key.size() + 1);
  if (required) fail(ErrorKind::Format, "line " + std::to_string(line) + ": missing field '" + key + "'");
  return {};
}

}  // namespace

std::string serialize_model(const NestedModel& model) {
  std::ostringstream out;
  out << "mgrf-model " << kModelFormatVersion << '\n';
  out << "levels " << model.levels << '\n';
  out << "potentials " << model.potentials.size() << '\n';
  for (const auto& p : model.potentials) {
    const auto& k = p.kind;
    out << "potential iteration=" << p.iteration << " tag=" << tag_name(k.tag) << " order=" << k.order
        << " bins=" << k.bins;
    if (k.tag == FeatureTag::BE) out << " threshold=" << k.be_threshold;
    if (k.tag == FeatureTag::FilterHist)
      out << " filter=" << k.filter_index << " lo=" << format_double(k.quant_lo) << " hi=" << format_double(k.quant_hi);
    out << '\n';
    if (k.tag == FeatureTag::FilterHist)
      out << "offsets footprint\n";
    else
      out << "offsets " << format_offsets(p.offsets) << '\n';
    out << "theta " << join_doubles(p.theta) << '\n';
    if (p.target.freq.empty())
      out << "target none\n";
    else
      out << "target " << p.target.clique_count << ' ' << join_doubles(p.target.freq) << '\n';
  }
  out << "end\n";
  return out.str();
}

NestedModel deserialize_model(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto next_line = [&](const std::string& expect) {
    if (!std::getline(in, line)) fail(ErrorKind::Format, "unexpected end of model text, expected '" + expect + "'");
    ++lineno;
    std::istringstream ls(line);
    std::vector<std::string> toks{std::istream_iterator<std::string>(ls), std::istream_iterator<std::string>()};
    if (toks.empty() || toks[0] != expect)
      fail(ErrorKind::Format, "line " + std::to_string(lineno) + ": expected '" + expect + "'");
    return toks;
  };

  auto header = next_line("mgrf-model");
  if (header.size() != 2 || parse_long(header[1]) != kModelFormatVersion)
    fail(ErrorKind::Format, "model format version mismatch (expected " + std::to_string(kModelFormatVersion) + ")");
  NestedModel model;
  auto lv = next_line("levels");
  if (lv.size() != 2) fail(ErrorKind::Format, "line 2: malformed levels");
  model.levels = static_cast<int>(parse_long(lv[1]));
  require(model.levels >= 2 && model.levels <= 256, "model level count out of range");
  auto np = next_line("potentials");
  if (np.size() != 2) fail(ErrorKind::Format, "line 3: malformed potential count");
  const long count = parse_long(np[1]);
  if (count < 0) fail(ErrorKind::Format, "negative potential count");

  for (long i = 0; i < count; ++i) {
    auto h = next_line("potential");
    const int hl = lineno;
    Potential p;
    p.iteration = static_cast<int>(parse_long(field(h, "iteration", true, hl)));
    FeatureKind k;
    k.tag = parse_tag(field(h, "tag", true, hl));
    k.order = static_cast<int>(parse_long(field(h, "order", true, hl)));
    k.bins = static_cast<int>(parse_long(field(h, "bins", true, hl)));
    k.levels = model.levels;
    if (k.tag == FeatureTag::BE) k.be_threshold = static_cast<int>(parse_long(field(h, "threshold", true, hl)));
    if (k.tag == FeatureTag::FilterHist) {
      k.filter_index = static_cast<int>(parse_long(field(h, "filter", true, hl)));
      k.quant_lo = parse_double(field(h, "lo", true, hl));
      k.quant_hi = parse_double(field(h, "hi", true, hl));
      if (k.filter_index < 0 || k.filter_index >= static_cast<int>(filter_bank().size()))
        fail(ErrorKind::Format, "line " + std::to_string(hl) + ": filter index out of range");
    }
    p.kind = k;
    auto offs = next_line("offsets");
    if (k.tag == FeatureTag::FilterHist) {
      p.offsets = filter_offsets(filter_bank()[static_cast<std::size_t>(k.filter_index)]);
    } else {
      const auto pos = line.find("offsets");
      p.offsets = parse_offsets(line.substr(pos + 7));
    }
    auto th = next_line("theta");
    for (std::size_t j = 1; j < th.size(); ++j) p.theta.push_back(parse_double(th[j]));
    auto tg = next_line("target");
    if (!(tg.size() == 2 && tg[1] == "none")) {
      if (tg.size() < 2) fail(ErrorKind::Format, "line " + std::to_string(lineno) + ": malformed target");
      p.target.clique_count = parse_long(tg[1]);
      for (std::size_t j = 2; j < tg.size(); ++j) p.target.freq.push_back(parse_double(tg[j]));
    }
    try {
      validate_potential(model.levels, p);
    } catch (const Error& e) {
      fail(ErrorKind::Format, "potential at line " + std::to_string(hl) + ": " + e.what());
    }
    model.potentials.push_back(std::move(p));
  }
  next_line("end");
  return model;
}

NestedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot read model file " + path);
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return deserialize_model(text);
}

void save_model(const NestedModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write model file " + path);
  out << serialize_model(model);
  if (!out) fail(ErrorKind::Io, "cannot write model file " + path);
}

std::string describe_model(const NestedModel& model) {
  std::ostringstream s;
  s << "levels " << model.levels << ", " << model.potentials.size() << " potentials\n";
  for (std::size_t i = 0; i < model.potentials.size(); ++i) {
    const auto& p = model.potentials[i];
    double lo = p.theta.empty() ? 0 : p.theta[0], hi = lo;
    for (double t : p.theta) {
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
    s << "#" << i << " iter " << p.iteration << " " << tag_name(p.kind.tag) << p.kind.order << " bins "
      << p.kind.bins << " theta [" << lo << ", " << hi << "]";
    if (p.kind.tag == FeatureTag::FilterHist) {
      s << " " << filter_bank()[static_cast<std::size_t>(p.kind.filter_index)].name() << "\n";
      continue;
    }
    s << "  offsets " << format_offsets(p.offsets) << "\n";
    if (p.offsets.size() < 2) continue;
    const auto e = CliqueExtent::of(p.offsets);
    for (int y = e.min_dy; y <= e.max_dy; ++y) {
      s << "    ";
      for (int x = e.min_dx; x <= e.max_dx; ++x) {
        char c = '.';
        for (std::size_t j = 0; j < p.offsets.size(); ++j)
          if (p.offsets[j] == Offset{x, y}) c = j == 0 ? '@' : 'o';
        s << c;
      }
      s << "\n";
    }
  }
  return s.str();
}

}  // namespace mgrf
