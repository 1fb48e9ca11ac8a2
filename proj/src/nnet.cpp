#include "cliphinge/nnet.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace cliphinge {

double TwoLayerNet::displacement_norm() const {
    double acc = 0.0;
    for (size_t i = 0; i < alpha.size(); ++i) {
        double d = alpha[i] - alpha0[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

TwoLayerNet init_net(int width, int input_dim, double radius, std::mt19937_64& rng) {
    if (width < 1 || input_dim < 1)
        throw std::invalid_argument("init_net: width and input_dim must be positive");
    if (radius < 0.0)
        throw std::invalid_argument("init_net: radius must be nonnegative");
    TwoLayerNet net;
    net.width = width;
    net.input_dim = input_dim;
    net.radius = radius;
    net.signs.resize(width);
    net.alpha0.resize(static_cast<size_t>(width) * input_dim);
    std::uniform_int_distribution<int> coin(0, 1);
    std::normal_distribution<double> gauss(0.0, 1.0 / std::sqrt(static_cast<double>(input_dim)));
    for (int i = 0; i < width; ++i)
        net.signs[i] = coin(rng) ? 1.0 : -1.0;
    for (auto& w : net.alpha0)
        w = gauss(rng);
    net.alpha = net.alpha0;
    return net;
}

double forward(const TwoLayerNet& net, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != net.input_dim)
        throw std::invalid_argument("forward: input dimension mismatch");
    double acc = 0.0;
    for (int i = 0; i < net.width; ++i) {
        const double* r = net.row(i);
        double z = 0.0;
        for (int j = 0; j < net.input_dim; ++j)
            z += r[j] * x[j];
        if (z > 0.0)
            acc += net.signs[i] * z;
    }
    return acc / std::sqrt(static_cast<double>(net.width));
}

std::vector<double> grad_alpha(const TwoLayerNet& net, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != net.input_dim)
        throw std::invalid_argument("grad_alpha: input dimension mismatch");
    std::vector<double> g(net.alpha.size(), 0.0);
    const double scale = 1.0 / std::sqrt(static_cast<double>(net.width));
    for (int i = 0; i < net.width; ++i) {
        const double* r = net.row(i);
        double z = 0.0;
        for (int j = 0; j < net.input_dim; ++j)
            z += r[j] * x[j];
        if (z > 0.0) {
            double* gi = g.data() + static_cast<size_t>(i) * net.input_dim;
            for (int j = 0; j < net.input_dim; ++j)
                gi[j] = net.signs[i] * scale * x[j];
        }
    }
    return g;
}

void project(TwoLayerNet& net) {
    double n = net.displacement_norm();
    if (n <= net.radius)
        return;
    double scale = net.radius / n;
    for (size_t i = 0; i < net.alpha.size(); ++i)
        net.alpha[i] = net.alpha0[i] + (net.alpha[i] - net.alpha0[i]) * scale;
}

void FeatureMap::embed(int s, int a, std::vector<double>& out) const {
    out.assign(dim(), 0.0);
    const double inv_sqrt2 = 0.70710678118654752440;
    out[s] = inv_sqrt2;
    out[n_states + a] = inv_sqrt2;
}

std::vector<double> FeatureMap::embed(int s, int a) const {
    std::vector<double> out;
    embed(s, a, out);
    return out;
}

namespace {

void write_hex(std::ostream& os, const std::vector<double>& vals) {
    char buf[40];
    for (size_t i = 0; i < vals.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%a", vals[i]);
        os << buf << (i + 1 == vals.size() ? "" : " ");
    }
    os << "\n";
}

std::vector<double> read_hex(std::istream& is, size_t n) {
    std::vector<double> out(n);
    std::string tok;
    for (size_t i = 0; i < n; ++i) {
        if (!(is >> tok))
            throw std::runtime_error("load_net: truncated weights");
        out[i] = std::strtod(tok.c_str(), nullptr);
    }
    return out;
}

}  // namespace

void save_net(std::ostream& os, const TwoLayerNet& net) {
    os << "net 1\n" << net.width << " " << net.input_dim << "\n";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%a", net.radius);
    os << buf << "\n";
    for (int i = 0; i < net.width; ++i)
        os << (net.signs[i] > 0 ? 1 : -1) << (i + 1 == net.width ? "" : " ");
    os << "\n";
    write_hex(os, net.alpha0);
    write_hex(os, net.alpha);
}

TwoLayerNet load_net(std::istream& is) {
    std::string tag;
    int version = 0;
    if (!(is >> tag >> version) || tag != "net" || version != 1)
        throw std::runtime_error("load_net: bad header");
    TwoLayerNet net;
    if (!(is >> net.width >> net.input_dim))
        throw std::runtime_error("load_net: bad sizes");
    std::string tok;
    if (!(is >> tok))
        throw std::runtime_error("load_net: missing radius");
    net.radius = std::strtod(tok.c_str(), nullptr);
    net.signs.resize(net.width);
    for (int i = 0; i < net.width; ++i) {
        int s = 0;
        if (!(is >> s) || (s != 1 && s != -1))
            throw std::runtime_error("load_net: bad sign");
        net.signs[i] = s;
    }
    size_t n = static_cast<size_t>(net.width) * net.input_dim;
    net.alpha0 = read_hex(is, n);
    net.alpha = read_hex(is, n);
    return net;
}

}  // namespace cliphinge
