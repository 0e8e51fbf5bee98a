#include "fwaudit/code_refs.hpp"

namespace fwaudit::elf {

namespace {

struct Segment {
    ByteSpan data;
    uint64_t vaddr;
    uint64_t file_base;
};

void scan_arm(const Segment& seg, bool be, uint64_t target, std::vector<CodeRef>& out) {
    ByteSpan d = seg.data;
    // Literal pools: 4-aligned words holding the absolute address.
    for (size_t i = 0; i + 4 <= d.size(); i += 4) {
        if (rd32(d, i, be) == target)
            out.push_back({seg.file_base + i, seg.vaddr + i, "literal_pool"});
    }
    // movw/movt split immediates (ARMv7 address materialization).
    // movw: cond 0011 0000 imm4 Rd imm12; movt: cond 0011 0100 imm4 Rd imm12.
    uint32_t lo16 = target & 0xffff;
    uint32_t hi16 = (target >> 16) & 0xffff;
    for (size_t i = 0; i + 4 <= d.size(); i += 4) {
        uint32_t w = rd32(d, i, be);
        if ((w & 0x0ff00000) != 0x03000000) continue;  // movw
        uint32_t imm = ((w >> 4) & 0xf000) | (w & 0x0fff);
        if (imm != lo16) continue;
        uint32_t rd = (w >> 12) & 0xf;
        // A matching movt for the same register within the next few insns.
        for (size_t j = i + 4; j + 4 <= d.size() && j <= i + 32; j += 4) {
            uint32_t w2 = rd32(d, j, be);
            if ((w2 & 0x0ff00000) != 0x03400000) continue;  // movt
            if (((w2 >> 12) & 0xf) != rd) continue;
            uint32_t imm2 = ((w2 >> 4) & 0xf000) | (w2 & 0x0fff);
            if (imm2 == hi16) {
                out.push_back({seg.file_base + i, seg.vaddr + i, "movw_movt"});
                break;
            }
        }
    }
}

void scan_aarch64(const Segment& seg, bool be, uint64_t target, std::vector<CodeRef>& out) {
    ByteSpan d = seg.data;
    uint64_t target_page = target & ~0xfffull;
    uint64_t target_lo = target & 0xfff;
    for (size_t i = 0; i + 4 <= d.size(); i += 4) {
        uint32_t w = rd32(d, i, be);
        if ((w & 0x9f000000) != 0x90000000) continue;  // adrp
        uint64_t pc = seg.vaddr + i;
        int64_t immhi = (w >> 5) & 0x7ffff;
        int64_t immlo = (w >> 29) & 0x3;
        int64_t imm = (immhi << 2) | immlo;   // 21-bit signed page count
        if (imm & (1 << 20)) imm -= (1 << 21);
        uint64_t page = (pc & ~0xfffull) + (static_cast<uint64_t>(imm) << 12);
        if (page != target_page) continue;
        uint32_t rd = w & 0x1f;
        for (size_t j = i + 4; j + 4 <= d.size() && j <= i + 32; j += 4) {
            uint32_t w2 = rd32(d, j, be);
            // add Xd, Xn, #imm12 (64-bit, no shift)
            if ((w2 & 0xffc00000) != 0x91000000) continue;
            uint32_t rn = (w2 >> 5) & 0x1f;
            if (rn != rd) continue;
            uint64_t imm12 = (w2 >> 10) & 0xfff;
            if (imm12 == target_lo) {
                out.push_back({seg.file_base + i, seg.vaddr + i, "adrp_add"});
                break;
            }
        }
    }
}

void scan_mips(const Segment& seg, bool be, uint64_t target, std::vector<CodeRef>& out) {
    ByteSpan d = seg.data;
    uint32_t t32 = static_cast<uint32_t>(target);
    for (size_t i = 0; i + 4 <= d.size(); i += 4) {
        uint32_t w = rd32(d, i, be);
        if ((w >> 26) != 0x0f || ((w >> 21) & 0x1f) != 0) continue;  // lui rt, imm
        uint32_t rt = (w >> 16) & 0x1f;
        uint32_t hi = w & 0xffff;
        for (size_t j = i + 4; j + 4 <= d.size() && j <= i + 64; j += 4) {
            uint32_t w2 = rd32(d, j, be);
            uint32_t op = w2 >> 26;
            uint32_t rs = (w2 >> 21) & 0x1f;
            if (rs != rt) continue;
            uint32_t lo = w2 & 0xffff;
            if (op == 0x09) {  // addiu: lo is sign-extended
                uint32_t composed = (hi << 16) + static_cast<uint32_t>(static_cast<int32_t>(static_cast<int16_t>(lo)));
                if (composed == t32) {
                    out.push_back({seg.file_base + i, seg.vaddr + i, "lui_addiu"});
                    break;
                }
            } else if (op == 0x0d) {  // ori
                if (((hi << 16) | lo) == t32) {
                    out.push_back({seg.file_base + i, seg.vaddr + i, "lui_ori"});
                    break;
                }
            }
        }
    }
}

void scan_x86(const Segment& seg, bool x64, uint64_t target, std::vector<CodeRef>& out) {
    ByteSpan d = seg.data;
    uint32_t t32 = static_cast<uint32_t>(target);
    bool abs_fits = target <= 0xffffffffull;
    for (size_t i = 0; i + 4 <= d.size(); ++i) {
        uint32_t w = rd32(d, i, false);
        if (abs_fits && w == t32) {
            out.push_back({seg.file_base + i, seg.vaddr + i, "abs32"});
            i += 3;
            continue;
        }
        if (x64) {
            // rip-relative: site + 4 + disp == target (immediate-free tail).
            uint64_t next = seg.vaddr + i + 4;
            int64_t disp = static_cast<int32_t>(w);
            if (next + disp == target) {
                out.push_back({seg.file_base + i, seg.vaddr + i, "rip_rel32"});
                i += 3;
            }
        }
    }
}

}  // namespace

std::optional<std::vector<CodeRef>> find_code_references(const ElfView& view,
                                                         uint64_t target_vaddr) {
    switch (view.machine) {
        case Machine::Arm:
        case Machine::AArch64:
        case Machine::Mips:
        case Machine::X86:
        case Machine::X64:
            break;
        default:
            return std::nullopt;  // no scanner registered
    }

    std::vector<CodeRef> out;
    for (const auto& p : view.segments) {
        if (p.type != PT_LOAD || !p.executable()) continue;
        if (p.offset >= view.raw.size()) continue;
        uint64_t size = std::min<uint64_t>(p.filesz, view.raw.size() - p.offset);
        Segment seg{view.bytes().subspan(p.offset, size), p.vaddr, p.offset};
        bool be = view.big_endian();
        switch (view.machine) {
            case Machine::Arm: scan_arm(seg, be, target_vaddr, out); break;
            case Machine::AArch64: scan_aarch64(seg, be, target_vaddr, out); break;
            case Machine::Mips: scan_mips(seg, be, target_vaddr, out); break;
            case Machine::X86: scan_x86(seg, false, target_vaddr, out); break;
            case Machine::X64: scan_x86(seg, true, target_vaddr, out); break;
            default: break;
        }
    }
    return out;
}

}  // namespace fwaudit::elf
