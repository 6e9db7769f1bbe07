import random

import pytest

from lexlab.audit import (
    AuditReport,
    Citation,
    audit_response,
    bigram_cosine,
    classify_citation,
    extract_citations,
    render_citation,
)
from lexlab.corpus import ArticleIndex, CitationKey
from lexlab.errors import EmptyCorpus


class TestExtraction:
    def test_chinese_numbered_citation(self):
        cits = extract_citations("根据《民法典》第一千零八十条规定，完成离婚登记，即解除婚姻关系。")
        assert len(cits) == 1
        assert cits[0].law_title == "民法典"
        assert cits[0].article_no == 1080
        assert "完成离婚登记" in cits[0].quoted_content

    def test_english_numbered_citation(self):
        text = (
            "According Article 32 of the Marriage and Family Administration "
            "Regulations, a man should fully attained the age of twenty-two years "
            "old to get married, and a woman the age of twenty years old."
        )
        cits = extract_citations(text)
        assert len(cits) == 1
        assert cits[0].law_title == "Marriage and Family Administration Regulations"
        assert cits[0].article_no == 32
        assert cits[0].quoted_content.startswith("a man should")

    def test_no_references(self):
        assert extract_citations("双方应当协商解决纠纷。") == []
        assert extract_citations("plain text without any legal reference") == []

    def test_title_only_chinese(self):
        cits = extract_citations("根据《民法典》，成年人可以依法结婚。")
        assert len(cits) == 1
        assert cits[0].article_no is None
        assert cits[0].quoted_content == "成年人可以依法结婚"

    def test_title_only_english(self):
        cits = extract_citations("According the Civil Code, an adult may marriage, but a minor may not.")
        assert len(cits) == 1
        assert cits[0].law_title == "Civil Code"
        assert cits[0].article_no is None

    def test_paragraph_captured(self):
        cits = extract_citations("《婚姻法》第二十一条第一款规定：重婚的，为无效婚姻。")
        assert cits[0].article_no == 21
        assert cits[0].paragraph_no == 1

    def test_multiple_left_to_right_nonoverlapping(self):
        text = "根据《民法典》第一千零七十二条和《民法典》第二十六条，继父母负有抚养义务。"
        cits = extract_citations(text)
        assert [c.article_no for c in cits] == [1072, 26]
        assert cits[0].span[1] <= cits[1].span[0]

    def test_spans_index_into_source(self):
        text = "前言。《民法典》第一千零四十七条：结婚年龄。"
        cit = extract_citations(text)[0]
        assert text[cit.span[0] : cit.span[1]] == "《民法典》第一千零四十七条"

    def test_quoted_content_capped(self):
        text = "根据《民法典》第一千条规定，" + "很" * 500 + "。"
        cit = extract_citations(text)[0]
        assert len(cit.quoted_content) == 200


class TestClassification:
    def test_existing_key_valid(self, marriage_index):
        cit = extract_citations("根据《民法典》第一千零四十七条规定，结婚年龄，男不得早于二十二周岁。")[0]
        finding = classify_citation(cit, marriage_index)
        assert finding.verdict == "VALID"
        assert finding.matched_key == CitationKey("民法典", 1047)

    def test_wrong_attribution_is_h2(self, marriage_index):
        cit = extract_citations(
            "根据《婚姻家庭管理条例》第三十二条规定，男不得早于二十二周岁，女不得早于二十周岁。"
        )[0]
        finding = classify_citation(cit, marriage_index)
        assert finding.verdict == "H2"
        assert finding.matched_key == CitationKey("民法典", 1047)
        assert finding.similarity >= 0.35

    def test_fabricated_title_only_is_h1(self, marriage_index):
        cit = extract_citations("根据《民法典》，成年人即可办理结婚，无须任何条件。")[0]
        finding = classify_citation(cit, marriage_index)
        assert finding.verdict == "H1"

    def test_title_only_with_real_content_is_valid(self, marriage_index):
        cit = extract_citations("根据《民法典》，直系血亲或者三代以内的旁系血亲禁止结婚。")[0]
        finding = classify_citation(cit, marriage_index)
        assert finding.verdict == "VALID"
        assert finding.matched_key == CitationKey("民法典", 1048)

    def test_title_only_wrong_title_is_h2(self, marriage_index):
        cit = extract_citations("根据《婚姻登记条例》，直系血亲或者三代以内的旁系血亲禁止结婚。")[0]
        finding = classify_citation(cit, marriage_index)
        assert finding.verdict == "H2"
        assert finding.matched_key.law_title == "民法典"

    def test_nonexistent_number_without_content_is_h1(self, marriage_index):
        cit = Citation(law_title="民法典", article_no=99999)
        finding = classify_citation(cit, marriage_index)
        assert finding.verdict == "H1"

    def test_valid_with_divergent_content_warns(self, marriage_index):
        cit = extract_citations("根据《民法典》第一千零四十七条规定，所有公民均可领取结婚补贴。")[0]
        finding = classify_citation(cit, marriage_index)
        assert finding.verdict == "VALID"
        assert finding.content_divergence_warning

    def test_empty_index(self):
        empty = ArticleIndex([])
        with pytest.raises(EmptyCorpus):
            classify_citation(Citation(law_title="民法典", article_no=1), empty)

    def test_deterministic(self, marriage_index):
        cit = extract_citations("根据《婚姻家庭管理条例》第三十二条规定，男不得早于二十二周岁。")[0]
        a = classify_citation(cit, marriage_index)
        b = classify_citation(cit, marriage_index)
        assert a == b

    def test_threshold_monotonicity(self, marriage_index):
        texts = [
            "根据《民法典》第一千零四十七条规定，结婚年龄，男不得早于二十二周岁。",
            "根据《婚姻家庭管理条例》第三十二条规定，男不得早于二十二周岁，女不得早于二十周岁。",
            "根据《民法典》第九千条规定，火星车必须装配太阳能电池板。",
            "根据《民法典》，完成离婚登记，即解除婚姻关系。",
            "根据《收养条例》，收养人应当年满三十周岁并且无子女。",
        ]
        citations = [extract_citations(t)[0] for t in texts]
        thresholds = [0.05, 0.2, 0.35, 0.5, 0.8, 1.0]
        rank = {"VALID": 0, "H2": 0, "H1": 1}
        for citation in citations:
            verdicts = [
                classify_citation(citation, marriage_index, t).verdict for t in thresholds
            ]
            # raising the threshold can only move VALID/H2 toward H1
            degrees = [rank[v] for v in verdicts]
            assert degrees == sorted(degrees)


class TestAuditResponse:
    def test_valid_plus_fabricated(self, marriage_index):
        text = (
            "根据《民法典》第一千零四十七条规定，结婚年龄，男不得早于二十二周岁。"
            "同时根据《民法典》第八千八百条规定，结婚可领取一次性补贴五万元。"
        )
        report = audit_response(text, marriage_index)
        assert [f.verdict for f in report.findings] == ["VALID", "H1"]
        assert report.has_h1 and not report.has_h2

    def test_empty_findings(self, marriage_index):
        report = audit_response("这段话没有引用任何法条。", marriage_index)
        assert report.findings == ()
        assert not report.has_h1 and not report.has_h2

    def test_h2_only_response(self, marriage_index):
        text = "根据《婚姻家庭管理条例》第三十二条规定，男不得早于二十二周岁，女不得早于二十周岁。"
        report = audit_response(text, marriage_index)
        assert report.has_h2 and not report.has_h1

    def test_flags_match_findings(self, marriage_index):
        texts = [
            "根据《民法典》第一千零四十八条规定，直系血亲禁止结婚。",
            "根据《动物保护法》第一条规定，这是完全捏造的规定内容。",
        ]
        for text in texts:
            report = audit_response(text, marriage_index)
            assert report.has_h1 == any(f.verdict == "H1" for f in report.findings)
            assert report.has_h2 == any(f.verdict == "H2" for f in report.findings)


class TestRenderRoundTrip:
    def test_known_keys(self, marriage_index):
        for article in marriage_index.articles():
            rendered = render_citation(article.key)
            cits = extract_citations(rendered + "：" + article.text)
            assert len(cits) >= 1
            assert cits[0].law_title == article.key.law_title
            assert cits[0].article_no == article.key.article_no

    def test_random_keys_property(self):
        rng = random.Random(31)
        for _ in range(100):
            key = CitationKey(
                law_title=rng.choice(["民法典", "刑法", "婚姻登记条例"]),
                article_no=rng.randint(1, 3000),
                paragraph_no=rng.choice([None, rng.randint(1, 9)]),
            )
            cits = extract_citations(render_citation(key))
            assert len(cits) == 1
            got = cits[0]
            assert (got.law_title, got.article_no, got.paragraph_no) == (
                key.law_title,
                key.article_no,
                key.paragraph_no,
            )


class TestFindingInvariants:
    RESPONSES = [
        "根据《民法典》第一千零四十七条规定，结婚年龄，男不得早于二十二周岁。",
        "根据《婚姻家庭管理条例》第三十二条规定，男不得早于二十二周岁，女不得早于二十周岁。",
        "根据《民法典》第八千条规定，结婚可以申请无息贷款。",
        "根据《民法典》，直系血亲或者三代以内的旁系血亲禁止结婚。",
        "根据《收养登记办法》，收养人应当同时具备下列条件：无子女或者只有一名子女。",
        "根据《星际法》第一条规定，月球表面建筑必须申报轨道登记。",
    ]

    def test_h2_matched_key_present_and_differs(self, marriage_index):
        for text in self.RESPONSES:
            for finding in audit_response(text, marriage_index).findings:
                if finding.verdict == "H2":
                    assert finding.matched_key is not None
                    assert finding.matched_key != finding.citation.key

    def test_valid_findings_resolve_via_lookup(self, marriage_index):
        for text in self.RESPONSES:
            for finding in audit_response(text, marriage_index).findings:
                if finding.verdict == "VALID":
                    if finding.citation.article_no is not None:
                        assert marriage_index.lookup(finding.citation.key) is not None
                    # title-only VALID carries the resolvable matched article
                    assert finding.matched_key is not None
                    assert marriage_index.lookup(finding.matched_key) is not None


class TestBigramCosine:
    def test_identical(self):
        assert bigram_cosine("结婚年龄", "结婚年龄") == pytest.approx(1.0)

    def test_disjoint(self):
        assert bigram_cosine("结婚年龄", "太阳能板") == 0.0

    def test_symmetric(self):
        a, b = "完成离婚登记即解除婚姻关系", "离婚登记完成之后婚姻关系解除"
        assert bigram_cosine(a, b) == pytest.approx(bigram_cosine(b, a))

    def test_empty(self):
        assert bigram_cosine("", "abc") == 0.0
