#include "seqrank/checkpoint.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

namespace seqrank {

namespace {

constexpr char kMagic[8] = {'S', 'E', 'Q', 'R', 'N', 'K', '0', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
}

std::uint32_t get_u32(const std::string& buf, std::size_t& pos) {
  if (pos + 4 > buf.size()) throw CheckpointError("truncated header");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + i]))
         << (8 * i);
  }
  pos += 4;
  return v;
}

// Tensors are serialized row-major regardless of Eigen's internal layout.
void append_matrix(std::string& out, const MatrixXd& m) {
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      const double v = m(r, c);
      char bytes[sizeof(double)];
      std::memcpy(bytes, &v, sizeof(double));
      out.append(bytes, sizeof(double));
    }
  }
}

void append_vector(std::string& out, const VectorXd& v) {
  const char* raw = reinterpret_cast<const char*>(v.data());
  out.append(raw, sizeof(double) * static_cast<std::size_t>(v.size()));
}

double read_double(const std::string& buf, std::size_t& pos) {
  if (pos + sizeof(double) > buf.size()) {
    throw CheckpointError("truncated tensor data");
  }
  double v;
  std::memcpy(&v, buf.data() + pos, sizeof(double));
  pos += sizeof(double);
  if (!std::isfinite(v)) throw CheckpointError("non-finite parameter value");
  return v;
}

void read_matrix(const std::string& buf, std::size_t& pos, MatrixXd& m) {
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) m(r, c) = read_double(buf, pos);
  }
}

void read_vector(const std::string& buf, std::size_t& pos, VectorXd& v) {
  for (Index i = 0; i < v.size(); ++i) v(i) = read_double(buf, pos);
}

void append_params(std::string& out, const RnnParams& p) {
  append_matrix(out, p.W_in);
  append_matrix(out, p.W_rec);
  append_vector(out, p.b);
}

void append_params(std::string& out, const LstmParams& p) {
  for (const LstmGateBlock* g : {&p.cand, &p.igate, &p.fgate, &p.ogate}) {
    append_matrix(out, g->W_in);
    append_matrix(out, g->W_rec);
    append_vector(out, g->b);
  }
  append_vector(out, p.peep_i);
  append_vector(out, p.peep_f);
  append_vector(out, p.peep_o);
}

RnnParams read_rnn(const std::string& buf, std::size_t& pos, Index cells,
                   Index dim) {
  RnnParams p;
  p.W_in.resize(cells, dim);
  p.W_rec.resize(cells, cells);
  p.b.resize(cells);
  read_matrix(buf, pos, p.W_in);
  read_matrix(buf, pos, p.W_rec);
  read_vector(buf, pos, p.b);
  return p;
}

LstmParams read_lstm(const std::string& buf, std::size_t& pos, Index cells,
                     Index dim, LstmVariant variant) {
  LstmParams p;
  p.variant = variant;
  for (LstmGateBlock* g : {&p.cand, &p.igate, &p.fgate, &p.ogate}) {
    g->W_in.resize(cells, dim);
    g->W_rec.resize(cells, cells);
    g->b.resize(cells);
    read_matrix(buf, pos, g->W_in);
    read_matrix(buf, pos, g->W_rec);
    read_vector(buf, pos, g->b);
  }
  p.peep_i.resize(cells);
  p.peep_f.resize(cells);
  p.peep_o.resize(cells);
  read_vector(buf, pos, p.peep_i);
  read_vector(buf, pos, p.peep_f);
  read_vector(buf, pos, p.peep_o);
  return p;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const AnyModel& model,
                     Side side, const std::string& dict_ref) {
  std::string out;
  out.append(kMagic, sizeof(kMagic));

  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        constexpr bool is_rnn = std::is_same_v<M, RnnModel>;
        out.push_back(is_rnn ? 0 : 1);
        if constexpr (is_rnn) {
          out.push_back(0);
        } else {
          out.push_back(m.fwd.variant == LstmVariant::kFull ? 0 : 1);
        }
        out.push_back(side == Side::kQuery ? 0 : 1);
        out.push_back(m.bidirectional() ? 1 : 0);
        put_u32(out, static_cast<std::uint32_t>(m.cells()));
        put_u32(out, static_cast<std::uint32_t>(m.input_dim()));
        put_u32(out, static_cast<std::uint32_t>(dict_ref.size()));
        out.append(dict_ref);
        append_params(out, m.fwd);
        if (m.bwd) append_params(out, *m.bwd);
      },
      model);

  std::ofstream file(path, std::ios::binary);
  if (!file) throw DataError("cannot open for writing: " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw DataError("write failed: " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw CheckpointError("cannot open checkpoint: " + path.string());
  std::string buf((std::istreambuf_iterator<char>(file)),
                  std::istreambuf_iterator<char>());

  if (buf.size() < sizeof(kMagic) + 4 + 12 ||
      std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError("not a model checkpoint: " + path.string());
  }
  std::size_t pos = sizeof(kMagic);
  const unsigned char arch_byte = buf[pos++];
  const unsigned char variant_byte = buf[pos++];
  const unsigned char side_byte = buf[pos++];
  const unsigned char bidi_byte = buf[pos++];
  if (arch_byte > 1 || variant_byte > 1 || side_byte > 1 || bidi_byte > 1) {
    throw CheckpointError("invalid header flags");
  }

  CheckpointMeta meta;
  meta.arch = arch_byte == 0 ? Arch::kRnn : Arch::kLstm;
  meta.variant = variant_byte == 0 ? LstmVariant::kFull : LstmVariant::kReduced;
  meta.side = side_byte == 0 ? Side::kQuery : Side::kDocument;
  meta.bidirectional = bidi_byte == 1;
  meta.cells = static_cast<std::int32_t>(get_u32(buf, pos));
  meta.dim = static_cast<std::int32_t>(get_u32(buf, pos));
  if (meta.cells < 1 || meta.dim < 1) {
    throw CheckpointError("invalid shape in header");
  }
  const std::uint32_t ref_len = get_u32(buf, pos);
  if (pos + ref_len > buf.size()) {
    throw CheckpointError("truncated dictionary reference");
  }
  meta.dict_ref = buf.substr(pos, ref_len);
  pos += ref_len;

  LoadedCheckpoint loaded;
  loaded.meta = meta;
  if (meta.arch == Arch::kRnn) {
    RnnModel m;
    m.fwd = read_rnn(buf, pos, meta.cells, meta.dim);
    if (meta.bidirectional) m.bwd = read_rnn(buf, pos, meta.cells, meta.dim);
    loaded.model = std::move(m);
  } else {
    LstmModel m;
    m.fwd = read_lstm(buf, pos, meta.cells, meta.dim, meta.variant);
    if (meta.bidirectional) {
      m.bwd = read_lstm(buf, pos, meta.cells, meta.dim, meta.variant);
    }
    loaded.model = std::move(m);
  }
  if (pos != buf.size()) {
    throw CheckpointError("trailing bytes after tensor data");
  }
  return loaded;
}

}  // namespace seqrank
