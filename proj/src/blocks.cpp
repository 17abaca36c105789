#include "sfrlab/blocks.hpp"

#include <stdexcept>

namespace sfrlab {

std::string block_op_name(const BlockSpec& block) {
    struct Visitor {
        std::string operator()(const InitialBlock&) const { return "initial_block"; }
        std::string operator()(const DownsampleBlock&) const { return "downsample_block"; }
        std::string operator()(const Sfrb&) const { return "sfrb"; }
        std::string operator()(const ResidualVariant&) const { return "residual_variant"; }
        std::string operator()(const DecoderUpsample&) const { return "decoder_upsample"; }
        std::string operator()(const RateUpsample&) const { return "rate_upsample"; }
    };
    return std::visit(Visitor{}, block);
}

std::string residual_kind_name(ResidualKind kind) {
    switch (kind) {
    case ResidualKind::Bt: return "Bt";
    case ResidualKind::BtFac: return "Bt-Fac";
    case ResidualKind::BtDw: return "Bt-Dw";
    case ResidualKind::BtFacDw: return "Bt-Fac-Dw";
    case ResidualKind::NonBt: return "NonBt";
    case ResidualKind::NonBtFac: return "NonBt-Fac";
    case ResidualKind::NonBtDw: return "NonBt-Dw";
    case ResidualKind::NonBtFacDw: return "NonBt-Fac-Dw";
    }
    throw std::logic_error("residual_kind_name: bad kind");
}

ResidualKind residual_kind_from_name(const std::string& name) {
    for (ResidualKind k :
         {ResidualKind::Bt, ResidualKind::BtFac, ResidualKind::BtDw, ResidualKind::BtFacDw,
          ResidualKind::NonBt, ResidualKind::NonBtFac, ResidualKind::NonBtDw,
          ResidualKind::NonBtFacDw})
        if (residual_kind_name(k) == name) return k;
    throw std::invalid_argument("unknown residual structure: " + name);
}

} // namespace sfrlab
