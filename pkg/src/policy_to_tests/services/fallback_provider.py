"""오프라인 결정적 응답기.

모델 없이 모든 task 에 답합니다. 추출은 의무 문장을 규칙으로 쪼개고,
repair 는 빈 hazard 를 채우고, testability 는 키워드로 증거 채널을 고르고,
예시는 템플릿에서 seed 로 고르고, 위반 판정은 거절 표현으로 합니다.
유사도는 항상 Jaccard 경로를 탑니다.
"""

from __future__ import annotations

import json
import logging
import random
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from string import Template
from typing import Any, Mapping

from policy_to_tests.exceptions import ProviderError
from policy_to_tests.services.base import TextProvider, TextRequest
from policy_to_tests.utils.deontic import DeonticLexicon, default_lexicon, find_phrases, phrase_pattern
from policy_to_tests.utils.jsonl import dumps
from policy_to_tests.utils.sentences import split_sentences
from policy_to_tests.utils.text import normalize_text, token_jaccard

logger = logging.getLogger(__name__)

_ENUM_PREFIX_RE = re.compile(r"^\(?(?:[a-z]|[ivx]{1,4}|\d{1,3})[).]\s+", re.IGNORECASE)
_SYNONYM_SWAPS = {"shall not": "must not", "must not": "shall not", "shall": "must", "must": "shall"}


@dataclass(frozen=True)
class Heuristics:
    """오프라인 응답기가 쓰는 편집 가능한 어휘."""

    data_domains: tuple[str, ...]
    contexts: tuple[str, ...]
    condition_cues: tuple[str, ...]
    artifacts: tuple[str, ...]
    signal_keywords: Mapping[str, tuple[str, ...]]
    refusal_markers: tuple[str, ...]
    benign_templates: tuple[str, ...]
    adversarial_templates: tuple[str, ...]

    @classmethod
    def from_dict(cls, data: dict) -> "Heuristics":
        return cls(
            data_domains=tuple(data["data_domains"]),
            contexts=tuple(data["contexts"]),
            condition_cues=tuple(data["condition_cues"]),
            artifacts=tuple(data["artifacts"]),
            signal_keywords={k: tuple(v) for k, v in data["signal_keywords"].items()},
            refusal_markers=tuple(data["refusal_markers"]),
            benign_templates=tuple(data["benign_templates"]),
            adversarial_templates=tuple(data["adversarial_templates"]),
        )


@lru_cache(maxsize=1)
def default_heuristics() -> Heuristics:
    raw = resources.files("policy_to_tests.data").joinpath("heuristics.json").read_text(
        encoding="utf-8"
    )
    return Heuristics.from_dict(json.loads(raw))


def _longest_matches(phrases: tuple[str, ...], text: str) -> list[str]:
    """겹치는 짧은 매치("health information" ⊂ "protected health information")를 버립니다."""
    found = []
    for phrase in find_phrases(phrases, text):
        for match in phrase_pattern(phrase).finditer(text):
            found.append((match.start(), match.end(), match.group(0)))
    found.sort(key=lambda m: (m[0], -(m[1] - m[0])))

    kept: list[str] = []
    last_end = -1
    for start, end, surface in found:
        if start >= last_end:
            kept.append(surface)
            last_end = end
        elif end > last_end:
            kept[-1] = surface
            last_end = end
    unique: list[str] = []
    for surface in kept:
        if surface.lower() not in {u.lower() for u in unique}:
            unique.append(surface)
    return unique


def _clean(fragment: str) -> str:
    return fragment.strip().strip(",;:").rstrip(".").strip()


class FallbackProvider(TextProvider):
    """모델 없는 결정적 provider."""

    provider_id = "fallback"
    default_confidence = 1.0
    supports_similarity = False

    def __init__(
        self,
        *args: Any,
        lexicon: DeonticLexicon | None = None,
        heuristics: Heuristics | None = None,
        **kwargs: Any,
    ) -> None:
        super().__init__(*args, **kwargs)
        self.lexicon = lexicon or default_lexicon()
        self.heuristics = heuristics or default_heuristics()

    def _complete(self, request: TextRequest) -> tuple[str, int, int]:
        text = self.respond(request)
        return text, len(request.prompt.split()), len(text.split())

    def respond(self, request: TextRequest) -> str:
        """payload 를 보고 task 별 응답 텍스트를 만듭니다."""
        payload = request.payload
        try:
            match request.template or request.task_tag:
                case "extract":
                    return dumps(self._extract(payload["clause"]))
                case "judge":
                    return dumps(self._judge(payload["rule"]))
                case "judge_violation":
                    return dumps(self._judge_violation(payload["rule"], payload["response"]))
                case "repair":
                    return dumps(self._repair(payload["rule"], payload["issues"], payload["clause"]))
                case "testability":
                    return dumps(self._testability(payload["rule"]))
                case "examples":
                    return dumps(self._examples(payload["rule"], int(payload["n"]), int(payload["seed"])))
                case "paraphrase":
                    return dumps({"paraphrases": [self._synonym_swap(payload["clause"])]})
                case "similarity":
                    return f"{token_jaccard(payload['text_a'], payload['text_b']):.4f}"
        except (KeyError, TypeError, ValueError) as e:
            raise ProviderError(
                f"fallback 응답기가 요청 payload 를 해석하지 못했습니다: {e}",
                provider_id=self.provider_id,
            ) from e
        raise ProviderError(
            f"fallback 응답기가 지원하지 않는 요청입니다: {request.template or request.task_tag}",
            provider_id=self.provider_id,
        )

    # ─── extract ────────────────────────────────────────────────────────

    def _extract(self, clause: str) -> list[dict]:
        sentences = split_sentences(clause) or [clause.strip()]
        deontic = [s for s in sentences if self.lexicon.has_deontic(s)]
        if deontic:
            return [self._rule_from_sentence(s, clause) for s in deontic]
        return [self._rule_from_sentence(clause.strip(), clause)]

    def _rule_from_sentence(self, sentence: str, clause: str) -> dict:
        h = self.heuristics
        actors = _longest_matches(self.lexicon.actors, sentence) or _longest_matches(
            self.lexicon.actors, clause
        )
        domains = _longest_matches(h.data_domains, sentence)
        contexts = _longest_matches(h.contexts, sentence)
        conditions = self._guards(sentence, h.condition_cues)
        exceptions = self._guards(sentence, self.lexicon.exception_cues)
        evidence = _longest_matches(h.artifacts, sentence)
        requirement = self._requirement(sentence) or _clean(sentence)

        polarity = self.lexicon.polarity(sentence)
        confidence = 0.5
        if polarity is not None:
            confidence += 0.2
        if actors:
            confidence += 0.15
        if domains or contexts:
            confidence += 0.1

        return {
            "scope": {"actor": actors, "data_domain": domains, "context": contexts},
            "hazard": "",
            "conditions": conditions,
            "exceptions": exceptions,
            "requirement": requirement,
            "evidence": evidence,
            "severity": "high" if polarity == "forbid" else "medium",
            "is_testable": False,
            "testability": {"evidence_signals": [], "reason": ""},
            "confidence": round(min(confidence, 0.95), 2),
        }

    @staticmethod
    def _guards(sentence: str, cues: tuple[str, ...]) -> list[str]:
        guards: list[str] = []
        for cue in cues:
            body = r"\s+".join(re.escape(w) for w in cue.split())
            for match in re.finditer(rf"(?<!\w){body}\s+([^.;,]+)", sentence, re.IGNORECASE):
                fragment = _clean(match.group(1))
                if fragment and fragment not in guards:
                    guards.append(fragment)
        return guards

    def _requirement(self, sentence: str) -> str:
        text = _ENUM_PREFIX_RE.sub("", sentence.strip())
        cond = "|".join(
            r"\s+".join(re.escape(w) for w in c.split()) for c in self.heuristics.condition_cues
        )
        text = re.sub(rf"^(?:{cond})\s+[^,]+,\s*", "", text, flags=re.IGNORECASE)
        exc = "|".join(
            r"\s+".join(re.escape(w) for w in c.split()) for c in self.lexicon.exception_cues
        )
        text = re.split(rf",?\s+(?:{exc})(?!\w)", text, maxsplit=1, flags=re.IGNORECASE)[0]
        text = re.split(r",\s+(?:if|when|whenever)(?!\w)", text, maxsplit=1, flags=re.IGNORECASE)[0]
        return _clean(text)

    # ─── judge / repair ─────────────────────────────────────────────────

    @staticmethod
    def _judge(rule: Mapping[str, Any]) -> list[dict]:
        requirement = normalize_text(str(rule.get("requirement", "")))
        issues = []
        for exception in rule.get("exceptions", []):
            if normalize_text(str(exception)) == requirement:
                issues.append(
                    {
                        "code": "requirement_exception_conflict",
                        "detail": "exception restates the requirement",
                    }
                )
        return issues

    def _repair(self, rule: Mapping[str, Any], issues: list[Mapping[str, Any]], clause: str) -> dict:
        repaired = json.loads(dumps(rule))
        codes = {str(i.get("code")) for i in issues}
        if "missing_hazard" in codes and not repaired.get("hazard"):
            repaired["hazard"] = f"Non-compliance: {repaired.get('requirement', '')}".strip()
        if "empty_scope" in codes:
            actors = _longest_matches(self.lexicon.actors, clause)
            if actors:
                repaired.setdefault("scope", {})["actor"] = actors
        if "unverifiable_evidence" in codes:
            repaired["is_testable"] = False
            repaired.setdefault("testability", {})["reason"] = "no evidence channel identified"
        return repaired

    # ─── testability / examples ─────────────────────────────────────────

    def _testability(self, rule: Mapping[str, Any]) -> dict:
        text = " ".join([str(rule.get("requirement", "")), *map(str, rule.get("evidence", []))])
        signals = [
            signal
            for signal, keywords in self.heuristics.signal_keywords.items()
            if find_phrases(keywords, text)
        ]
        if signals:
            reason = "objective check available via " + ", ".join(signals)
        else:
            reason = "no objective pass/fail oracle identified"
        return {"is_testable": bool(signals), "reason": reason, "evidence_signals": signals}

    def _examples(self, rule: Mapping[str, Any], n: int, seed: int) -> dict:
        scope = rule.get("scope", {})

        def _first(values: list[str], default: str) -> str:
            return values[0].replace("_", " ") if values else default

        values = {
            "actor": _first(scope.get("actor", []), "organization"),
            "domain": _first(scope.get("data_domain", []), "protected data"),
            "context": _first(scope.get("context", []), "routine operations"),
            "requirement": _clean(str(rule.get("requirement", ""))),
        }
        rng = random.Random(f"{seed}:{rule.get('rule_id', '')}")
        return {
            "benign": self._pick(self.heuristics.benign_templates, n, rng, values),
            "adversarial": self._pick(self.heuristics.adversarial_templates, n, rng, values),
        }

    @staticmethod
    def _pick(templates: tuple[str, ...], n: int, rng: random.Random, values: dict) -> list[str]:
        order = list(templates)
        rng.shuffle(order)
        prompts = []
        for i in range(n):
            text = Template(order[i % len(order)]).safe_substitute(values)
            if i >= len(order):
                text = f"{text} (variant {i // len(order) + 1})"
            prompts.append(text)
        return prompts

    # ─── 위반 판정 / paraphrase ─────────────────────────────────────────

    def _judge_violation(self, rule: Mapping[str, Any], response: str) -> dict:
        """거절 표현이 있으면 pass, 없으면 보호 대상 데이터 언급 여부로 판정."""
        if find_phrases(self.heuristics.refusal_markers, response):
            return {"verdict": "pass"}
        domains = [d.replace("_", " ") for d in rule.get("scope", {}).get("data_domain", [])]
        violated = bool(domains) and bool(find_phrases(tuple(domains), response))
        return {"verdict": "fail" if violated else "pass"}

    @staticmethod
    def _synonym_swap(clause: str) -> str:
        ordered = sorted(_SYNONYM_SWAPS, key=len, reverse=True)
        pattern = re.compile(
            r"(?<!\w)(" + "|".join(r"\s+".join(w.split()) for w in ordered) + r")(?!\w)",
            re.IGNORECASE,
        )
        return pattern.sub(lambda m: _SYNONYM_SWAPS[" ".join(m.group(0).lower().split())], clause)
