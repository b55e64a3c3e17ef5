#include "g2t/decoder.hpp"

#include <cmath>
#include <deque>

#include "g2t/errors.hpp"
#include "g2t/tokens.hpp"

namespace g2t {

namespace {

Tensor glorot(std::size_t rows, std::size_t cols, Rng& rng) {
    double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    return Tensor::uniform({rows, cols}, -limit, limit, rng, /*requires_grad=*/true);
}

Tensor zero_param(std::size_t n) {
    return Tensor::param({n}, std::vector<double>(n, 0.0));
}

std::size_t argmax_first(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

std::vector<int> kind_indices(const std::vector<NodeKind>& kinds, NodeKind want) {
    std::vector<int> out;
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        if (kinds[i] == want) out.push_back(static_cast<int>(i));
    }
    return out;
}

} // namespace

DecoderParams make_decoder_params(const TrainConfig& cfg, const Vocab& output_vocab, Rng& rng) {
    DecoderParams p;
    p.dim = cfg.model_dim;
    p.attention = cfg.attention;
    p.parent_feeding = cfg.parent_feeding;
    p.sibling_feeding = cfg.sibling_feeding;

    const std::size_t d = static_cast<std::size_t>(p.dim);
    const std::size_t v = output_vocab.size();
    p.emb = Tensor::uniform({v, d}, -0.05, 0.05, rng, true);
    p.lstm.Wx = glorot(4 * d, 3 * d, rng);
    p.lstm.Wh = glorot(4 * d, d, rng);
    p.lstm.b = zero_param(4 * d);
    if (p.attention != AttentionMode::None) p.attn_Wa = glorot(d, 2 * d, rng);
    p.Wc = glorot(5 * d, d, rng);
    p.bc = zero_param(d);
    p.Wv = glorot(d, v, rng);
    p.bv = zero_param(v);
    p.bridge_Wh = glorot(d, d, rng);
    p.bridge_Wc = glorot(d, d, rng);
    return p;
}

std::vector<NamedTensor> named_tensors(const DecoderParams& p) {
    std::vector<NamedTensor> out;
    auto put = [&out](const std::string& name, const Tensor& t) {
        if (t.defined()) out.push_back({name, t});
    };
    put("emb", p.emb);
    put("lstm.Wx", p.lstm.Wx);
    put("lstm.Wh", p.lstm.Wh);
    put("lstm.b", p.lstm.b);
    put("attn.Wa", p.attn_Wa);
    put("Wc", p.Wc);
    put("bc", p.bc);
    put("Wv", p.Wv);
    put("bv", p.bv);
    put("bridge.Wh", p.bridge_Wh);
    put("bridge.Wc", p.bridge_Wc);
    return out;
}

Attention attend(const EncodedGraph& enc, const Tensor& s_t, const DecoderParams& p) {
    const std::size_t two_d = enc.z.cols();
    Attention out;

    if (p.attention == AttentionMode::None) {
        Tensor zero_ctx = Tensor::zeros({two_d});
        out.c1 = zero_ctx;
        out.c2 = zero_ctx;
        out.s_tilde = tanh(add(vecmat(concat({out.c1, out.c2, s_t}, 0), p.Wc), p.bc));
        return out;
    }

    std::vector<int> words = kind_indices(enc.node_kinds, NodeKind::Word);
    if (words.empty()) throw ContractError("attend: graph has no word nodes");
    Tensor q = vecmat(s_t, p.attn_Wa); // {2d}

    if (p.attention == AttentionMode::Uniform) {
        // one softmax across every node, context duplicated into both slots
        out.alpha = softmax(matvec(enc.z, q));
        Tensor c = vecmat(out.alpha, enc.z);
        out.c1 = c;
        out.c2 = c;
    } else {
        Tensor zw = gather_rows(enc.z, words);
        out.alpha = softmax(matvec(zw, q));
        out.c1 = vecmat(out.alpha, zw);
        std::vector<int> rels = kind_indices(enc.node_kinds, NodeKind::Relation);
        if (rels.empty()) {
            out.c2 = Tensor::zeros({two_d});
        } else {
            Tensor zr = gather_rows(enc.z, rels);
            out.beta = softmax(matvec(zr, q));
            out.c2 = vecmat(out.beta, zr);
        }
    }
    out.s_tilde = tanh(add(vecmat(concat({out.c1, out.c2, s_t}, 0), p.Wc), p.bc));
    return out;
}

StepResult step(const DecoderState& st, int y_prev, const DecoderParams& p,
                const EncodedGraph& enc) {
    if (y_prev < 0 || static_cast<std::size_t>(y_prev) >= p.emb.rows()) {
        throw ContractError("decoder step: token id " + std::to_string(y_prev) +
                            " outside vocabulary of " + std::to_string(p.emb.rows()));
    }
    const std::size_t d = static_cast<std::size_t>(p.dim);
    Tensor parent = (p.parent_feeding && st.parent_feed.defined()) ? st.parent_feed
                                                                   : Tensor::zeros({d});
    Tensor sibling = (p.sibling_feeding && st.sibling_feed.defined()) ? st.sibling_feed
                                                                      : Tensor::zeros({d});
    Tensor x = concat({row_of(p.emb, static_cast<std::size_t>(y_prev)), parent, sibling}, 0);

    StepResult res;
    res.state = lstm_cell(x, st.lstm, p.lstm);
    res.att = attend(enc, res.state.h, p);
    res.logits = add(vecmat(res.att.s_tilde, p.Wv), p.bv);
    return res;
}

namespace {

LstmState bridge_state(const EncodedGraph& enc, const DecoderParams& p) {
    return {matvec(p.bridge_Wh, enc.g), matvec(p.bridge_Wc, enc.g)};
}

struct GreedyTask {
    LstmState init;
    Tensor parent_feed;           // undefined for the root
    int parent = -1;
    int depth = 1;
    std::vector<std::string> tokens;
    std::vector<int> children;
};

TreeNode assemble(const std::vector<GreedyTask>& tasks, int idx) {
    const GreedyTask& t = tasks[idx];
    TreeNode node;
    node.tokens = t.tokens.empty() ? std::vector<std::string>{kUnkTok} : t.tokens;
    for (int c : t.children) node.children.push_back(assemble(tasks, c));
    return node;
}

} // namespace

OutputTree decode_greedy(const EncodedGraph& enc, const DecoderParams& p,
                         const Vocab& output_vocab, const DecodeLimits& limits,
                         const std::function<void(const Attention&)>& observer) {
    std::vector<GreedyTask> tasks;
    tasks.push_back({bridge_state(enc, p), Tensor{}, -1, 1, {}, {}});
    std::vector<Tensor> final_h(1);
    std::vector<int> sibling_of(1, -1); // previous child of the same parent

    for (std::size_t cur = 0; cur < tasks.size(); ++cur) {
        DecoderState st;
        st.lstm = tasks[cur].init;
        st.parent_feed = tasks[cur].parent_feed;
        if (sibling_of[cur] >= 0) st.sibling_feed = final_h[sibling_of[cur]];

        int y_prev = kBosId;
        for (int t = 0; t < limits.max_len; ++t) {
            StepResult res = step(st, y_prev, p, enc);
            st.lstm = res.state;
            if (observer) observer(res.att);

            int y = static_cast<int>(argmax_first(res.logits.values()));
            if (y == kEosId) break;
            if (y == kSubTreeId) {
                bool room = tasks.size() < static_cast<std::size_t>(limits.max_nodes) &&
                            tasks[cur].depth < limits.max_depth;
                if (room) {
                    tasks[cur].tokens.push_back(kSubTreeTok);
                    int child = static_cast<int>(tasks.size());
                    tasks[cur].children.push_back(child);
                    sibling_of.push_back(tasks[cur].children.size() >= 2
                                             ? tasks[cur].children[tasks[cur].children.size() - 2]
                                             : -1);
                    tasks.push_back({res.state, res.att.s_tilde, static_cast<int>(cur),
                                     tasks[cur].depth + 1, {}, {}});
                    final_h.emplace_back();
                } else {
                    // no capacity for a child: degrade the placeholder
                    tasks[cur].tokens.push_back(kUnkTok);
                    y = kUnkId;
                }
            } else {
                tasks[cur].tokens.push_back(output_vocab.token_of(y));
            }
            y_prev = y;
        }
        final_h[cur] = st.lstm.h;
    }

    return OutputTree{assemble(tasks, 0)};
}

Tensor teacher_forced_loss(const OutputTree& gold, const EncodedGraph& enc,
                           const DecoderParams& p, const Vocab& output_vocab) {
    std::vector<SubTask> tasks = decompose_for_training(gold);

    // per task: captured (state, post-attention state) at each placeholder
    // target position, ready for the children that point there
    std::vector<std::vector<std::pair<int, std::pair<LstmState, Tensor>>>> captures(tasks.size());
    std::vector<Tensor> final_h(tasks.size());

    Tensor total = Tensor::scalar(0.0);
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const SubTask& task = tasks[i];

        DecoderState st;
        if (task.parent < 0) {
            st.lstm = bridge_state(enc, p);
        } else {
            bool found = false;
            for (const auto& cap : captures[task.parent]) {
                if (cap.first == task.parent_token_pos) {
                    st.lstm = cap.second.first;
                    st.parent_feed = cap.second.second;
                    found = true;
                    break;
                }
            }
            if (!found) throw ContractError("teacher forcing: missing capture for child task");
        }
        if (task.sibling >= 0) st.sibling_feed = final_h[task.sibling];

        int y_prev = kBosId;
        for (std::size_t t = 0; t < task.gold.size(); ++t) {
            StepResult res = step(st, y_prev, p, enc);
            st.lstm = res.state;

            int target = output_vocab.id_of(task.gold[t]);
            total = sub(total, pick(log_softmax(res.logits), static_cast<std::size_t>(target)));

            if (task.gold[t] == kSubTreeTok) {
                captures[i].push_back({static_cast<int>(t), {res.state, res.att.s_tilde}});
            }
            y_prev = target;
        }
        final_h[i] = st.lstm.h;
    }
    return total;
}

} // namespace g2t
