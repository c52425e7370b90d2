import io
import random
from collections import deque

import pytest

from prefrev import errors
from prefrev.prefs import (
    Alternatives,
    LinearOrder,
    Profile,
    enumerate_orders,
    iter_profiles,
    parse_order,
)
from prefrev.proofcheck import build_perez_profile
from prefrev.rules import (
    RESOLUTE_RULES,
    RuleTable,
    TieBreak,
    baldwin_winner,
    black_winner,
    borda_vector,
    borda_winner,
    copeland_set,
    dodgson_scores,
    dodgson_winner,
    kemeny_rankings,
    kemeny_winner,
    maximin_scores,
    maximin_winner,
    nanson_winner,
    plurality_vector,
    plurality_winner,
    ranked_pairs_winner,
    read_rule_table,
    resolute_rule,
    schulze_winner,
    scoring_winner,
    set_rule,
    tabulate_rule,
    uncovered_set,
    write_rule_table,
)
from prefrev.tally import condorcet_winner, margin_matrix

ABC = Alternatives(("a", "b", "c"))
ABCD = Alternatives(("a", "b", "c", "d"))

CONDORCET_EXTENSIONS = ("maximin", "black", "baldwin", "nanson", "dodgson",
                        "kemeny", "schulze", "ranked-pairs")


def profile_from(texts, alternatives):
    return Profile(tuple(parse_order(t, alternatives) for t in texts))


@pytest.fixture(scope="module")
def perez():
    return build_perez_profile()


@pytest.fixture(scope="module")
def tb5():
    return TieBreak.lexicographic(5)


class TestPerezSuite:
    """The 41-voter showcase profile; every rule's outcome is pinned."""

    def test_borda_and_black(self, perez, tb5):
        profile, alts = perez
        assert alts.label_of(borda_winner(profile, tb5)) == "y"
        assert alts.label_of(black_winner(profile, tb5)) == "y"

    def test_maximin_strictly_unique(self, perez, tb5):
        profile, alts = perez
        scores = maximin_scores(profile)
        t = alts.id_of("t")
        assert all(scores[t] > scores[a] for a in range(5) if a != t)
        assert maximin_winner(profile, tb5) == t

    def test_kemeny_unique_ranking(self, perez, tb5):
        profile, alts = perez
        rankings = kemeny_rankings(profile)
        assert len(rankings) == 1
        assert [alts.label_of(a) for a in rankings[0].ranking] == \
            ["z", "y", "x", "t", "u"]
        assert alts.label_of(kemeny_winner(profile, tb5)) == "z"

    def test_baldwin_and_nanson(self, perez, tb5):
        profile, alts = perez
        assert alts.label_of(baldwin_winner(profile, tb5)) == "z"
        assert alts.label_of(nanson_winner(profile, tb5)) == "z"

    def test_dodgson_winner_and_t_score(self, perez, tb5):
        profile, alts = perez
        scores = dodgson_scores(profile)
        assert scores[alts.id_of("t")] == 15
        assert alts.label_of(dodgson_winner(profile, tb5)) == "y"

    def test_dodgson_y_score_with_constructive_witness(self, perez):
        profile, alts = perez
        y, z = alts.id_of("y"), alts.id_of("z")
        margins = margin_matrix(profile)
        # y trails only z; each adjacent swap moves that tally by at most 1
        deficit = (1 - margins.margin(y, z) + 1) // 2
        assert deficit == 8
        assert all(margins.margin(y, a) > 0 for a in range(5) if a not in (y, z))
        # 8 voters rank z immediately above y; swapping them suffices
        swapped = 0
        votes = list(profile.votes)
        for i, vote in enumerate(votes):
            pos = vote.positions()
            if pos[z] + 1 == pos[y] and swapped < 8:
                ranking = list(vote.ranking)
                ranking[pos[z]], ranking[pos[y]] = ranking[pos[y]], ranking[pos[z]]
                votes[i] = LinearOrder(tuple(ranking))
                swapped += 1
        assert swapped == 8
        assert condorcet_winner(Profile(tuple(votes))) == y
        assert dodgson_scores(profile)[y] == 8

    def test_schulze_and_ranked_pairs(self, perez, tb5):
        profile, alts = perez
        assert alts.label_of(schulze_winner(profile, tb5)) == "t"
        assert alts.label_of(ranked_pairs_winner(profile, tb5)) == "t"

    def test_uncovered_set(self, perez):
        profile, alts = perez
        assert alts.label_set(uncovered_set(profile)) == "{x,y,z}"


class TestScoringRules:
    def test_plurality_unanimous(self):
        profile = profile_from(["b>a>c"] * 4, ABC)
        assert plurality_winner(profile, TieBreak.lexicographic(3)) == 1

    def test_borda_single_voter(self):
        profile = profile_from(["c>a>d>b"], ABCD)
        assert borda_winner(profile, TieBreak.lexicographic(4)) == 2

    def test_score_vector_validation(self):
        with pytest.raises(errors.PrefRevError):
            scoring_winner(profile_from(["a>b>c"], ABC),
                           borda_vector(4), TieBreak.lexicographic(3))
        from prefrev.rules import ScoreVector
        with pytest.raises(errors.PrefRevError):
            ScoreVector((0, 1, 2))

    def test_anonymity(self):
        rng = random.Random(5)
        orders = enumerate_orders(4)
        tie = TieBreak.lexicographic(4)
        for _ in range(100):
            votes = [rng.choice(orders) for _ in range(5)]
            shuffled = votes[:]
            rng.shuffle(shuffled)
            for vector in (borda_vector(4), plurality_vector(4)):
                assert scoring_winner(Profile(tuple(votes)), vector, tie) == \
                    scoring_winner(Profile(tuple(shuffled)), vector, tie)


def relabel_profile(profile: Profile, sigma: list[int]) -> Profile:
    return Profile(tuple(LinearOrder(tuple(sigma[a] for a in v.ranking))
                         for v in profile.votes))


class TestNeutralityWithTieBreak:
    @pytest.mark.parametrize("name", RESOLUTE_RULES)
    def test_relabelling_commutes(self, name):
        if name == "condorcet":
            pytest.skip("only defined on the Condorcet domain")
        rng = random.Random(17)
        m = 4
        orders = enumerate_orders(m)
        for _ in range(30):
            profile = Profile(tuple(rng.choice(orders) for _ in range(5)))
            sigma = list(range(m))
            rng.shuffle(sigma)
            tie = TieBreak(LinearOrder(tuple(rng.sample(range(m), m))))
            relabeled_tie = TieBreak(
                LinearOrder(tuple(sigma[a] for a in tie.priority.ranking)))
            rule = resolute_rule(name, m, tie)
            relabeled_rule = resolute_rule(name, m, relabeled_tie)
            assert relabeled_rule(relabel_profile(profile, sigma)) == \
                sigma[rule(profile)]


class TestCondorcetExtensions:
    @pytest.mark.parametrize("name", CONDORCET_EXTENSIONS)
    def test_exhaustive_m3_n3(self, name):
        rule = resolute_rule(name, 3)
        for profile in iter_profiles(3, 3):
            winner = condorcet_winner(profile)
            if winner is not None:
                assert rule(profile) == winner

    @pytest.mark.parametrize("name", CONDORCET_EXTENSIONS)
    def test_randomized_larger(self, name):
        rng = random.Random(23)
        for m, n in ((4, 5), (5, 3)):
            orders = enumerate_orders(m)
            rule = resolute_rule(name, m)
            checked = 0
            while checked < 25:
                profile = Profile(tuple(rng.choice(orders) for _ in range(n)))
                winner = condorcet_winner(profile)
                if winner is None:
                    continue
                assert rule(profile) == winner
                checked += 1


class TestSetRules:
    def test_condorcet_winner_collapses_all_sets(self):
        profile = profile_from(["a>b>c", "a>c>b", "b>a>c"], ABC)
        assert condorcet_winner(profile) == 0
        assert copeland_set(profile) == {0}
        assert uncovered_set(profile) == {0}
        assert set_rule("top-cycle")(profile) == {0}

    def test_three_cycle_top_cycle_is_everything(self):
        cycle = profile_from(["a>b>c", "b>c>a", "c>a>b"], ABC)
        assert set_rule("top-cycle")(cycle) == {0, 1, 2}
        assert uncovered_set(cycle) == {0, 1, 2}
        assert copeland_set(cycle) == {0, 1, 2}

    def test_uncovered_contains_copeland_on_tournaments(self):
        rng = random.Random(3)
        orders = enumerate_orders(4)
        for _ in range(100):
            profile = Profile(tuple(rng.choice(orders) for _ in range(5)))
            assert copeland_set(profile) <= uncovered_set(profile)

    def test_top_cycle_members_beat_outsiders(self):
        rng = random.Random(9)
        orders = enumerate_orders(5)
        for _ in range(100):
            profile = Profile(tuple(rng.choice(orders) for _ in range(5)))
            cycle = set_rule("top-cycle")(profile)
            margins = margin_matrix(profile)
            for inside in cycle:
                for outside in set(range(5)) - cycle:
                    assert margins.margin(inside, outside) > 0


class TestKemeny:
    def test_unanimous(self):
        profile = profile_from(["b>c>a"] * 3, ABC)
        assert kemeny_rankings(profile) == (parse_order("b>c>a", ABC),)

    def test_single_voter(self):
        profile = profile_from(["d>a>c>b"], ABCD)
        assert kemeny_rankings(profile) == (parse_order("d>a>c>b", ABCD),)

    def test_all_optima_attain_max_score(self):
        rng = random.Random(31)
        orders = enumerate_orders(4)
        for _ in range(30):
            profile = Profile(tuple(rng.choice(orders) for _ in range(4)))
            margins = margin_matrix(profile)

            def score(ranking):
                total = 0
                for i, a in enumerate(ranking):
                    for b in ranking[i + 1:]:
                        total += margins.margin(a, b)
                return total

            best = kemeny_rankings(profile)
            assert best
            values = {score(r.ranking) for r in best}
            assert len(values) == 1
            peak = values.pop()
            for other in orders:
                assert score(other.ranking) <= peak

    def test_m_too_large(self):
        profile = Profile((LinearOrder(tuple(range(8))),))
        with pytest.raises(errors.MTooLargeForExactKemeny):
            kemeny_rankings(profile)


class TestEliminationRules:
    def test_m2_majority(self):
        ab = Alternatives(("a", "b"))
        profile = profile_from(["b>a", "b>a", "a>b"], ab)
        tie = TieBreak.lexicographic(2)
        assert baldwin_winner(profile, tie) == 1
        assert nanson_winner(profile, tie) == 1

    def test_nanson_all_tied_falls_back_to_tie_break(self):
        cycle = profile_from(["a>b>c", "b>c>a", "c>a>b"], ABC)
        assert nanson_winner(cycle, TieBreak(parse_order("c>b>a", ABC))) == 2
        assert nanson_winner(cycle, TieBreak.lexicographic(3)) == 0

    def test_baldwin_eliminates_tie_break_worst(self):
        # a,b,c tie at Borda 3; the priority-worst goes first, then the
        # remaining pair is settled by majority (b beats c, a beats b)
        cycle = profile_from(["a>b>c", "b>c>a", "c>a>b"], ABC)
        assert baldwin_winner(cycle, TieBreak(parse_order("c>b>a", ABC))) == 1
        assert baldwin_winner(cycle, TieBreak.lexicographic(3)) == 0


class TestDodgson:
    def test_condorcet_winner_scores_zero(self):
        profile = profile_from(["a>b>c", "a>c>b", "b>a>c"], ABC)
        assert dodgson_scores(profile)[0] == 0

    def test_bfs_oracle_agreement(self):
        rng = random.Random(41)
        orders = enumerate_orders(3)
        for _ in range(25):
            profile = Profile(tuple(rng.choice(orders) for _ in range(3)))
            scores = dodgson_scores(profile)
            oracle = bfs_swap_distances(profile, cap=4)
            for alt in range(3):
                if oracle[alt] is not None:
                    assert scores[alt] == oracle[alt]
                else:
                    assert scores[alt] > 4

    def test_budget_caps(self):
        profile = Profile(tuple(enumerate_orders(3)[:1]) * 65)
        with pytest.raises(errors.BudgetExceeded):
            dodgson_scores(profile)


def bfs_swap_distances(profile: Profile, cap: int) -> dict[int, int | None]:
    """Breadth-first search over adjacent-swap moves, up to ``cap`` swaps."""
    found: dict[int, int | None] = {a: None for a in range(profile.m)}
    start = tuple(v.ranking for v in profile.votes)
    seen = {start}
    frontier = deque([(start, 0)])
    while frontier:
        state, depth = frontier.popleft()
        winner = condorcet_winner(Profile(tuple(LinearOrder(r) for r in state)))
        if winner is not None and found[winner] is None:
            found[winner] = depth
        if depth == cap:
            continue
        for voter in range(profile.n):
            for pos in range(profile.m - 1):
                ranking = list(state[voter])
                ranking[pos], ranking[pos + 1] = ranking[pos + 1], ranking[pos]
                nxt = state[:voter] + (tuple(ranking),) + state[voter + 1:]
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append((nxt, depth + 1))
    return found


class TestMaximin:
    def test_cycle_tie_break(self):
        cycle = profile_from(["a>b>c", "b>c>a", "c>a>b"], ABC)
        assert maximin_winner(cycle, TieBreak.lexicographic(3)) == 0
        assert maximin_winner(cycle, TieBreak(parse_order("b>a>c", ABC))) == 1


class TestTwoAlternatives:
    def test_majority_winner_everywhere(self):
        ab = Alternatives(("a", "b"))
        profile = profile_from(["b>a", "b>a", "a>b"], ab)
        tie = TieBreak.lexicographic(2)
        for name in ("maximin", "schulze", "ranked-pairs", "black",
                     "kemeny", "dodgson"):
            assert resolute_rule(name, 2, tie)(profile) == 1


class TestBlack:
    def test_no_condorcet_winner_means_borda(self):
        rng = random.Random(13)
        orders = enumerate_orders(4)
        tie = TieBreak.lexicographic(4)
        seen = 0
        while seen < 20:
            profile = Profile(tuple(rng.choice(orders) for _ in range(5)))
            if condorcet_winner(profile) is not None:
                continue
            assert black_winner(profile, tie) == borda_winner(profile, tie)
            seen += 1


class TestRuleTable:
    def test_tabulated_rule_matches_origin(self):
        table = tabulate_rule(resolute_rule("maximin", 3), 2, 3)
        rule = resolute_rule("maximin", 3)
        for profile in iter_profiles(2, 3):
            assert table(profile) == rule(profile)

    def test_file_round_trip_profile_mode(self):
        table = tabulate_rule(resolute_rule("borda", 3), 2, 3)
        sink = io.StringIO()
        write_rule_table(table, sink)
        again = read_rule_table(io.StringIO(sink.getvalue()))
        assert again == table

    def test_file_round_trip_c2_mode(self):
        chosen = {}
        for profile in iter_profiles(2, 3):
            chosen.setdefault(margin_matrix(profile).key(),
                              maximin_winner(profile, TieBreak.lexicographic(3)))
        table = RuleTable(2, 3, "c2", chosen)
        sink = io.StringIO()
        write_rule_table(table, sink)
        again = read_rule_table(io.StringIO(sink.getvalue()))
        assert again.chosen == table.chosen

    def test_c2_keying_ignores_voter_order(self):
        chosen = {}
        for profile in iter_profiles(2, 3):
            chosen.setdefault(margin_matrix(profile).key(), 0)
        table = RuleTable(2, 3, "c2", chosen)
        orders = enumerate_orders(3)
        p = Profile((orders[1], orders[4]))
        q = Profile((orders[4], orders[1]))
        assert table(p) == table(q)

    def test_domain_mismatch_on_wrong_n(self):
        table = tabulate_rule(resolute_rule("borda", 3), 2, 3)
        three_voters = Profile(tuple(enumerate_orders(3)[:1]) * 3)
        with pytest.raises(errors.DomainMismatch):
            table(three_voters)

    def test_missing_entry_in_c2(self):
        table = RuleTable(2, 3, "c2", {})
        profile = Profile(tuple(enumerate_orders(3)[:1]) * 2)
        with pytest.raises(errors.MissingEntry):
            table(profile)

    def test_partial_profile_table_rejected(self):
        with pytest.raises(errors.MissingEntry):
            RuleTable(2, 3, "profile", (0,) * 35)

    def test_unknown_rule(self):
        with pytest.raises(errors.UnknownRule):
            resolute_rule("approval", 3)
        with pytest.raises(errors.UnknownRule):
            set_rule("bipartisan")
