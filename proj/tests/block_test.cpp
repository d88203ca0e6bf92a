#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <set>

#include "daledger/block.hpp"
#include "test_util.hpp"

using namespace daledger;
using namespace daledger::testing;

namespace {

constexpr nmt::NamespaceId kCurrency{0x10};

std::vector<nmt::Message> currency_messages(std::size_t count)
{
    std::vector<nmt::Message> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back({kCurrency, to_bytes("tx" + std::to_string(i))});
    return out;
}

FetchSample serve_from(const ExtendedDataSquare& sq, const std::set<CellIndex>& withheld = {})
{
    return [&sq, withheld](CellIndex at) -> std::optional<SampleResponse> {
        if (withheld.count(at)) return std::nullopt;
        return answer_sample(sq, at);
    };
}

} // namespace

TEST(Header, EncodingRoundTripsAndChains)
{
    auto g = genesis_header();
    auto b1 = make_block(g, currency_messages(3), ValidityMode::Probabilistic);
    auto b2 = make_block(b1.header, {}, ValidityMode::Simplistic);
    EXPECT_EQ(b1.header.encode().size(), BlockHeader::kEncodedSize);
    EXPECT_EQ(BlockHeader::decode(b1.header.encode()), b1.header);
    EXPECT_EQ(b1.header.prev_hash, g.hash());
    EXPECT_EQ(b2.header.prev_hash, b1.header.hash());
    EXPECT_EQ(b2.header.height, 2u);
    EXPECT_EQ(b2.header.k, 0u);
    EXPECT_EQ(b1.header.availability_root, availability_root(b1.square->line_roots()));
    EXPECT_EQ(b1.square->line_roots().size(), 4 * std::size_t{b1.header.k});
}

TEST(MakeBlock, EmptyBlockHasPlaceholderLeaf)
{
    auto b = make_block(genesis_header(), {}, ValidityMode::Simplistic);
    auto leaf = empty_block_leaf();
    EXPECT_EQ(b.header.m_root, nmt::Hasher().hash_leaf(leaf));
    EXPECT_TRUE(block_valid_simplistic(b.header, [&] { return std::optional(b.messages); }));
    auto p = make_block(genesis_header(), {}, ValidityMode::Probabilistic);
    EXPECT_EQ(p.header.k, 1u);
}

TEST(MakeBlock, TenCurrencyMessagesAreProvable)
{
    std::vector<nmt::Message> msgs = currency_messages(10);
    msgs.push_back({nmt::NamespaceId{0x20}, Bytes(100, 1)});
    msgs.push_back({nmt::NamespaceId{0x05}, Bytes(5, 2)});
    auto b = make_block(genesis_header(), msgs, ValidityMode::Simplistic);
    auto tree = message_tree(b.messages);
    EXPECT_EQ(tree.root(), b.header.m_root);
    auto proof = tree.prove_namespace(kCurrency);
    EXPECT_EQ(proof.paths.size(), 10u);
    EXPECT_TRUE(nmt::verify_namespace(b.header.m_root, kCurrency, currency_messages(10), proof));
}

TEST(MakeBlock, StableSortKeepsSubmissionOrder)
{
    std::vector<nmt::Message> msgs{{nmt::NamespaceId{3}, to_bytes("a")}, {nmt::NamespaceId{1}, to_bytes("b")},
        {nmt::NamespaceId{3}, to_bytes("c")}, {nmt::NamespaceId{1}, to_bytes("d")}};
    auto b = make_block(genesis_header(), msgs, ValidityMode::Simplistic);
    std::vector<std::string> order;
    for (const auto& m : b.messages) order.emplace_back(m.payload.begin(), m.payload.end());
    EXPECT_EQ(order, (std::vector<std::string>{"b", "d", "a", "c"}));
}

TEST(MakeBlock, OversizedLeafIsRejected)
{
    std::vector<nmt::Message> msgs{{kCurrency, Bytes(101, 0)}};
    EXPECT_THROW(make_block(genesis_header(), msgs, ValidityMode::Simplistic, 100), OversizedLeaf);
    msgs[0].payload.pop_back();
    EXPECT_NO_THROW(make_block(genesis_header(), msgs, ValidityMode::Simplistic, 100));
}

TEST(MakeBlock, ReservedNamespacesAreRejected)
{
    std::vector<nmt::Message> msgs{{nmt::kParityNamespace, Bytes(1, 0)}};
    EXPECT_THROW(make_block(genesis_header(), msgs, ValidityMode::Simplistic), Error);
}

TEST(BlockCodec, ArchiveRoundTrip)
{
    std::mt19937_64 rng(5);
    std::vector<Block> chain;
    BlockHeader prev = genesis_header();
    for (int i = 0; i < 4; ++i) {
        auto mode = i % 2 ? ValidityMode::Probabilistic : ValidityMode::Simplistic;
        chain.push_back(make_block(prev, random_sorted_messages(rng, 8, 5, 300), mode, nmt::kDefaultMaxLeafSize, 64));
        prev = chain.back().header;
    }
    auto path = std::filesystem::temp_directory_path() / "daledger_archive_test.bin";
    write_archive(path, chain);
    auto back = read_archive(path);
    std::filesystem::remove(path);
    ASSERT_EQ(back.size(), chain.size());
    for (std::size_t i = 0; i < chain.size(); ++i) {
        EXPECT_EQ(back[i].header, chain[i].header);
        EXPECT_EQ(back[i].messages, chain[i].messages);
        if (chain[i].square) {
            EXPECT_EQ(back[i].square->row_roots, chain[i].square->row_roots);
        }
    }
    EXPECT_THROW(read_archive("/nonexistent/dir/archive.bin"), IoError);
}

TEST(SimplisticRule, Verdicts)
{
    std::mt19937_64 rng(6);
    auto b = make_block(genesis_header(), random_sorted_messages(rng, 20, 4), ValidityMode::Simplistic);
    EXPECT_TRUE(block_valid_simplistic(b.header, [&] { return std::optional(b.messages); }));
    EXPECT_FALSE(block_valid_simplistic(b.header, [] { return std::optional<std::vector<nmt::Message>>(); }));
    for (std::size_t i = 0; i < b.messages.size(); ++i) {
        auto tampered = b.messages;
        tampered[i].payload.push_back(0x55);
        EXPECT_FALSE(block_valid_simplistic(b.header, [&] { return std::optional(tampered); }));
        auto dropped = b.messages;
        dropped.erase(dropped.begin() + static_cast<std::ptrdiff_t>(i));
        EXPECT_FALSE(block_valid_simplistic(b.header, [&] { return std::optional(dropped); }));
    }
}

TEST(SimplisticRule, VerdictIgnoresContent)
{
    // Garbage and well-formed payloads are treated alike when available.
    std::mt19937_64 rng(7);
    for (int t = 0; t < 20; ++t) {
        auto a = make_block(genesis_header(), random_sorted_messages(rng, 10, 3), ValidityMode::Simplistic);
        std::vector<nmt::Message> junk{{kCurrency, random_bytes(rng, 50)}};
        auto b = make_block(genesis_header(), junk, ValidityMode::Simplistic);
        EXPECT_EQ(block_valid_simplistic(a.header, [&] { return std::optional(a.messages); }),
            block_valid_simplistic(b.header, [&] { return std::optional(b.messages); }));
    }
}

TEST(ProbabilisticRule, HonestSquareAccepts)
{
    std::mt19937_64 rng(8);
    auto b = make_block(genesis_header(), random_sorted_messages(rng, 60, 6, 200), ValidityMode::Probabilistic,
        nmt::kDefaultMaxLeafSize, 64);
    auto roots = b.square->line_roots();
    for (int t = 0; t < 20; ++t) {
        auto cells = draw_cells(rng, b.header.k, 15);
        EXPECT_TRUE(block_valid_probabilistic(b.header, roots, cells, serve_from(*b.square), {}));
    }
}

TEST(ProbabilisticRule, WrongLineRootsReject)
{
    std::mt19937_64 rng(9);
    auto b = make_block(genesis_header(), random_sorted_messages(rng, 30, 6), ValidityMode::Probabilistic);
    auto roots = b.square->line_roots();
    roots[1].hash[0] ^= 1;
    auto cells = draw_cells(rng, b.header.k, 4);
    EXPECT_FALSE(block_valid_probabilistic(b.header, roots, cells, serve_from(*b.square), {}));
}

TEST(ProbabilisticRule, ForgedSampleRejects)
{
    std::mt19937_64 rng(10);
    auto b = make_block(genesis_header(), random_sorted_messages(rng, 30, 6), ValidityMode::Probabilistic);
    auto roots = b.square->line_roots();
    const auto& sq = *b.square;
    FetchSample liar = [&](CellIndex at) -> std::optional<SampleResponse> {
        auto r = answer_sample(sq, at);
        r.share.data[0] ^= 1;
        return r;
    };
    auto cells = draw_cells(rng, b.header.k, 1);
    EXPECT_FALSE(block_valid_probabilistic(b.header, roots, cells, liar, {}));
}

TEST(ProbabilisticRule, WithholdingIsDetectedWithFifteenSamples)
{
    // k = 32: 4096 cells, adversary hides the top-left (k+1) x (k+1) block.
    std::mt19937_64 rng(11);
    std::vector<nmt::Message> msgs;
    for (int i = 0; i < 1000; ++i) msgs.push_back({nmt::NamespaceId{1 + std::uint64_t(i % 7)}, random_bytes(rng, 8)});
    auto b = make_block(genesis_header(), msgs, ValidityMode::Probabilistic, nmt::kDefaultMaxLeafSize, 24);
    ASSERT_EQ(b.header.k, 32u);
    std::set<CellIndex> withheld;
    for (std::size_t r = 0; r <= 32; ++r)
        for (std::size_t c = 0; c <= 32; ++c) withheld.insert({r, c});
    auto partial = *b.square;
    for (auto at : withheld) partial.cell(at.row, at.col).reset();
    ASSERT_EQ(reconstruct(partial, b.square->row_roots, b.square->col_roots).status,
        ReconstructResult::Status::Unrecoverable);

    auto roots = b.square->line_roots();
    auto fetch = serve_from(*b.square, withheld);
    const int trials = 4000;
    int rejected = 0;
    for (int t = 0; t < trials; ++t) {
        auto cells = draw_cells(rng, 32, 15);
        rejected += !block_valid_probabilistic(b.header, roots, cells, fetch, {});
    }
    double p = sampler::detection_probability(4096, 1089, 15);
    double se = std::sqrt(p * (1 - p) / trials);
    EXPECT_GE(static_cast<double>(rejected) / trials, p - 4 * se);
    EXPECT_GE(p, 0.99);
}

TEST(ProbabilisticRule, FraudProofInInboxRejects)
{
    std::mt19937_64 rng(12);
    auto b = make_block(genesis_header(), random_sorted_messages(rng, 30, 6), ValidityMode::Probabilistic,
        nmt::kDefaultMaxLeafSize, 48);
    auto& sq = *b.square;
    sq.cell(1, sq.k)->data[2] ^= 0x10;
    sq.commit();
    b.header.availability_root = availability_root(sq.line_roots());
    auto roots = sq.line_roots();
    auto cells = draw_cells(rng, b.header.k, 15);
    EXPECT_TRUE(block_valid_probabilistic(b.header, roots, cells, serve_from(sq), {}));
    auto proof = gen_coding_fraud_proof(sq, Axis::Row, 1);
    std::vector<CodingFraudProof> inbox{proof};
    EXPECT_FALSE(block_valid_probabilistic(b.header, roots, cells, serve_from(sq), inbox));
}

TEST(ChainViewTest, SingleChainTipIsInChain)
{
    ChainView view;
    auto g = genesis_header();
    view.add(g, true);
    BlockHeader prev = g;
    std::vector<BlockHeader> hs;
    for (int i = 0; i < 3; ++i) {
        auto b = make_block(prev, currency_messages(i), ValidityMode::Simplistic);
        view.add(b.header, true);
        hs.push_back(b.header);
        prev = b.header;
    }
    for (const auto& h : hs) EXPECT_TRUE(in_chain(h, view));
    EXPECT_EQ(view.best_tip(), hs.back().hash());
}

namespace {

std::vector<BlockHeader> extend(ChainView& view, BlockHeader prev, int length, Byte tag, int invalid_at = -1)
{
    std::vector<BlockHeader> out;
    for (int i = 0; i < length; ++i) {
        std::vector<nmt::Message> m{{nmt::NamespaceId{tag}, Bytes{tag, static_cast<Byte>(i)}}};
        auto b = make_block(prev, m, ValidityMode::Simplistic);
        view.add(b.header, i != invalid_at);
        out.push_back(b.header);
        prev = b.header;
    }
    return out;
}

} // namespace

TEST(ChainViewTest, LongerForkWins)
{
    ChainView view;
    auto g = genesis_header();
    view.add(g, true);
    auto a = extend(view, g, 3, 1);
    auto b = extend(view, g, 5, 2);
    for (const auto& h : a) EXPECT_FALSE(in_chain(h, view));
    for (const auto& h : b) EXPECT_TRUE(in_chain(h, view));
}

TEST(ChainViewTest, UnavailableBlockDisqualifiesFork)
{
    ChainView view;
    auto g = genesis_header();
    view.add(g, true);
    auto a = extend(view, g, 3, 1);
    auto b = extend(view, g, 5, 2, 2);
    for (const auto& h : a) EXPECT_TRUE(in_chain(h, view));
    for (std::size_t i = 2; i < b.size(); ++i) EXPECT_FALSE(in_chain(b[i], view));
}

TEST(ChainViewTest, TiesGoToSmallestHash)
{
    ChainView view;
    auto g = genesis_header();
    view.add(g, true);
    auto a = extend(view, g, 2, 1);
    auto b = extend(view, g, 2, 2);
    auto tip = view.best_tip();
    ASSERT_TRUE(tip);
    EXPECT_EQ(*tip, std::min(a.back().hash(), b.back().hash()));
}

TEST(ChainViewTest, InChainImpliesValidOnRandomViews)
{
    std::mt19937_64 rng(13);
    for (int t = 0; t < 50; ++t) {
        ChainView view;
        auto g = genesis_header();
        view.add(g, true);
        std::vector<BlockHeader> all{g};
        for (int i = 0; i < 20; ++i) {
            const auto& parent = all[rng() % all.size()];
            std::vector<nmt::Message> m{{nmt::NamespaceId{1}, random_bytes(rng, 4)}};
            auto b = make_block(parent, m, ValidityMode::Simplistic);
            view.add(b.header, rng() % 5 != 0);
            all.push_back(b.header);
        }
        for (const auto& h : all)
            if (in_chain(h, view)) {
                EXPECT_TRUE(view.valid(h.hash()));
            }
    }
}
