#include "costs.hpp"

#include <array>
#include <cstdio>
#include <sstream>

#include "errors.hpp"

namespace lcfed {

StrategyKind parse_strategy(const std::string& name) {
    if (name == "fedavg") return StrategyKind::fedavg;
    if (name == "fedper") return StrategyKind::fedper;
    if (name == "fesem") return StrategyKind::fesem;
    if (name == "fedgroup") return StrategyKind::fedgroup;
    if (name == "cgpfl") return StrategyKind::cgpfl;
    if (name == "ifca") return StrategyKind::ifca;
    if (name == "lcfed") return StrategyKind::lcfed;
    throw ConfigError("unknown strategy '" + name +
                      "' (expected one of fedavg, fedper, fesem, fedgroup, "
                      "cgpfl, ifca, lcfed)");
}

const char* strategy_name(StrategyKind s) {
    switch (s) {
    case StrategyKind::fedavg: return "fedavg";
    case StrategyKind::fedper: return "fedper";
    case StrategyKind::fesem: return "fesem";
    case StrategyKind::fedgroup: return "fedgroup";
    case StrategyKind::cgpfl: return "cgpfl";
    case StrategyKind::ifca: return "ifca";
    case StrategyKind::lcfed: return "lcfed";
    }
    return "?";
}

std::uint64_t similarity_flops(StrategyKind s, std::uint64_t m,
                               std::uint64_t k, std::uint64_t dim,
                               std::uint64_t d) {
    switch (s) {
    case StrategyKind::fedavg:
    case StrategyKind::fedper:
    case StrategyKind::ifca:
        return 0;
    case StrategyKind::fesem:
    case StrategyKind::fedgroup:
    case StrategyKind::cgpfl:
        return 3 * m * k * dim;
    case StrategyKind::lcfed:
        return 3 * m * k * d + m * d;
    }
    return 0;
}

CommBytes comm_bytes(StrategyKind s, std::uint64_t m_selected, std::uint64_t k,
                     std::uint64_t dim, std::uint64_t dim_phi, std::uint64_t d,
                     std::uint64_t bytes_per_scalar) {
    CommBytes out;
    out.up = m_selected * dim;
    std::uint64_t down = m_selected * dim;
    switch (s) {
    case StrategyKind::ifca:
        down = m_selected * k * dim;
        break;
    case StrategyKind::lcfed:
        out.up += m_selected * d;
        down = m_selected * (dim + dim_phi);
        break;
    default:
        break;
    }
    out.up *= bytes_per_scalar;
    out.down = down * bytes_per_scalar;
    return out;
}

std::string cost_report_text(std::uint64_t m, std::uint64_t k,
                             std::uint64_t dim, std::uint64_t dim_phi,
                             std::uint64_t d,
                             std::uint64_t bytes_per_scalar) {
    constexpr std::array<StrategyKind, 7> all = {
        StrategyKind::fedavg, StrategyKind::fedper,   StrategyKind::fesem,
        StrategyKind::fedgroup, StrategyKind::cgpfl,  StrategyKind::ifca,
        StrategyKind::lcfed};

    std::ostringstream os;
    auto table = [&](std::uint64_t tm, std::uint64_t tk) {
        os << "scale: m=" << tm << " k=" << tk << " dim=" << dim
           << " dim_phi=" << dim_phi << " d=" << d
           << " bytes_per_scalar=" << bytes_per_scalar << "\n";
        char line[160];
        std::snprintf(line, sizeof line, "%-10s %20s %20s %20s\n", "strategy",
                      "sim_flops", "bytes_up", "bytes_down");
        os << line;
        for (StrategyKind s : all) {
            std::uint64_t fl = similarity_flops(s, tm, tk, dim, d);
            CommBytes cb =
                comm_bytes(s, tm, tk, dim, dim_phi, d, bytes_per_scalar);
            std::snprintf(line, sizeof line, "%-10s %20llu %20llu %20llu\n",
                          strategy_name(s),
                          static_cast<unsigned long long>(fl),
                          static_cast<unsigned long long>(cb.up),
                          static_cast<unsigned long long>(cb.down));
            os << line;
        }
    };

    const bool user_scale_is_reference =
        (m == 100 && k == 10) || (m == 1000 && k == 100);
    if (!user_scale_is_reference) {
        table(m, k);
        os << "\n";
    }
    table(100, 10);
    os << "\n";
    table(1000, 100);
    os << "\nper-pair similarity reduction factor (dim/d): " << dim / d
       << "\n";
    return os.str();
}

} // namespace lcfed
