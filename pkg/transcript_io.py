"""
Transcript I/O Module for the STV Audit Engine

Canonical JSON for transcripts and anomaly reports, the election text
writer, and the count-by-count table printed by `count --print`.

Every rational is written as an exact "n/d" string. Keys are sorted and
nothing time-dependent is written, so equal transcripts give equal bytes.
"""

import json
import re
from typing import Any, Optional

from analysis import AnomalyReport, Finding, FindingKind
from engine import (ActionKind, CountAction, CountStep, CountTranscript,
                    ParcelTransfer)
from error_handler import ElectionParseError, TranscriptFormatError
from model import (CandidateState, CandidateStatus, Election, PaperBundle,
                   Parcel)
from parser import election_from_json
from rational import Rational, format_rational, parse_rational
from rules import Quota, Ruleset

TRANSCRIPT_FORMAT = "stv-audit-transcript"
REPORT_FORMAT = "stv-audit-report"
FORMAT_VERSION = 1

_BARE_NAME = re.compile(r"^[^\W\d][\w\-'.]*$")


def _opt(x: Optional[Rational]) -> Optional[str]:
    return None if x is None else format_rational(x)


def _opt_parse(text: Optional[str]) -> Optional[Rational]:
    return None if text is None else parse_rational(text)


def dumps(document: dict) -> str:
    return json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# region Elections
def election_to_json(e: Election) -> dict:
    return {
        "name": e.name,
        "vacancies": e.vacancies,
        "candidates": [c.name for c in e.candidates],
        "ballots": [{"preferences": list(b.preferences), "count": b.multiplicity} for b in e.ballots],
    }


def _quoted(text: str) -> str:
    escaped = text.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def _quote_name(name: str) -> str:
    return name if _BARE_NAME.fullmatch(name) else _quoted(name)


def _quote_title(name: str) -> str:
    """ The name line is read raw unless the name needs quoting to survive """
    if name and name == name.strip() and not any(ch in name for ch in '#"\\'):
        return name
    return _quoted(name)


def write_election_text(e: Election) -> str:
    """ Writes the line format parse_election reads """
    lines = [
        f"name: {_quote_title(e.name)}",
        f"vacancies: {e.vacancies}",
        "candidates: " + ", ".join(_quote_name(c.name) for c in e.candidates),
    ]
    for ballot in e.ballots:
        prefs = " > ".join(_quote_name(e.candidates[p].name) for p in ballot.preferences)
        lines.append(f"{ballot.multiplicity}: {prefs}")
    return "\n".join(lines) + "\n"
# endregion


# region Transcripts
def _transfer_to_json(tr: ParcelTransfer) -> dict:
    return {
        "source_received_at": tr.source_received_at,
        "papers": tr.papers,
        "incoming_tv": format_rational(tr.incoming_tv),
        "outgoing_tv": format_rational(tr.outgoing_tv),
        "destination": tr.destination,
        "value": format_rational(tr.value),
    }


def _step_to_json(step: CountStep) -> dict:
    return {
        "index": step.index,
        "action": {
            "kind": step.action.kind.value,
            "candidate": step.action.candidate,
            "batch": step.action.batch,
            "batches": step.action.batches,
            "batch_tv": _opt(step.action.batch_tv),
        },
        "removed": format_rational(step.removed),
        "credited": [format_rational(c) for c in step.credited],
        "transfer_value_used": _opt(step.transfer_value_used),
        "exhausted_papers": step.exhausted_papers,
        "exhausted_value": format_rational(step.exhausted_value),
        "rounding_loss": format_rational(step.rounding_loss),
        "elected_now": list(step.elected_now),
        "excluded_now": step.excluded_now,
        "tallies": [format_rational(t) for t in step.tallies],
        "transfers": [_transfer_to_json(tr) for tr in step.transfers],
        "surplus_fraction": _opt(step.surplus_fraction),
        "exhausted_aggregate": _opt(step.exhausted_aggregate),
        "exclusion_margin": _opt(step.exclusion_margin),
    }


def _state_to_json(state: CandidateState) -> dict:
    return {
        "status": state.status.value,
        "tally": format_rational(state.tally),
        "order_elected": state.order_elected,
        "parcels": [
            {
                "bundles": [[b.ballot_index, b.cursor, b.count] for b in p.bundles],
                "transfer_value": format_rational(p.transfer_value),
                "received_at": p.received_at,
                "credited": format_rational(p.credited),
            }
            for p in state.parcels
        ],
    }


def transcript_to_json(t: CountTranscript) -> dict:
    return {
        "format": TRANSCRIPT_FORMAT,
        "version": FORMAT_VERSION,
        "election": election_to_json(t.election),
        "ruleset": t.ruleset.to_json(),
        "quota": t.quota.value,
        "counts": [_step_to_json(s) for s in t.steps],
        "winners": list(t.winners),
        "winner_names": t.election.names(t.winners),
        "final_states": [_state_to_json(s) for s in t.final_states],
    }


def serialize_transcript(t: CountTranscript) -> str:
    return dumps(transcript_to_json(t))


def _step_from_json(data: dict) -> CountStep:
    action = data["action"]
    return CountStep(
        index=data["index"],
        action=CountAction(
            kind=ActionKind(action["kind"]),
            candidate=action.get("candidate"),
            batch=action.get("batch"),
            batches=action.get("batches"),
            batch_tv=_opt_parse(action.get("batch_tv")),
        ),
        removed=parse_rational(data["removed"]),
        credited=tuple(parse_rational(c) for c in data["credited"]),
        transfer_value_used=_opt_parse(data.get("transfer_value_used")),
        exhausted_papers=data["exhausted_papers"],
        exhausted_value=parse_rational(data["exhausted_value"]),
        rounding_loss=parse_rational(data["rounding_loss"]),
        elected_now=tuple(data["elected_now"]),
        excluded_now=data.get("excluded_now"),
        tallies=tuple(parse_rational(t) for t in data["tallies"]),
        transfers=tuple(
            ParcelTransfer(
                source_received_at=tr["source_received_at"],
                papers=tr["papers"],
                incoming_tv=parse_rational(tr["incoming_tv"]),
                outgoing_tv=parse_rational(tr["outgoing_tv"]),
                destination=tr["destination"],
                value=parse_rational(tr["value"]),
            )
            for tr in data.get("transfers", [])
        ),
        surplus_fraction=_opt_parse(data.get("surplus_fraction")),
        exhausted_aggregate=_opt_parse(data.get("exhausted_aggregate")),
        exclusion_margin=_opt_parse(data.get("exclusion_margin")),
    )


def _state_from_json(data: dict) -> CandidateState:
    return CandidateState(
        status=CandidateStatus(data["status"]),
        tally=parse_rational(data["tally"]),
        order_elected=data.get("order_elected"),
        parcels=tuple(
            Parcel(
                bundles=tuple(PaperBundle(*bundle) for bundle in p["bundles"]),
                transfer_value=parse_rational(p["transfer_value"]),
                received_at=p["received_at"],
                credited=parse_rational(p["credited"]),
            )
            for p in data.get("parcels", [])
        ),
    )


def parse_transcript(source: str) -> CountTranscript:
    """ Inverse of serialize_transcript; raises TranscriptFormatError on anything malformed """
    try:
        data = json.loads(source)
    except json.JSONDecodeError as exc:
        raise TranscriptFormatError(f"transcript is not JSON: {exc.msg} (line {exc.lineno})") from exc
    if not isinstance(data, dict) or data.get("format") != TRANSCRIPT_FORMAT:
        raise TranscriptFormatError("not an stv-audit transcript")
    if data.get("version") != FORMAT_VERSION:
        raise TranscriptFormatError(f"unsupported transcript version {data.get('version')!r}")

    try:
        return CountTranscript(
            election=election_from_json(data["election"]),
            ruleset=Ruleset.from_json(data["ruleset"]),
            quota=Quota(data["quota"]),
            steps=tuple(_step_from_json(s) for s in data["counts"]),
            winners=tuple(data["winners"]),
            final_states=tuple(_state_from_json(s) for s in data["final_states"]),
        )
    except ElectionParseError as exc:
        raise TranscriptFormatError(f"embedded election is invalid: {exc}") from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise TranscriptFormatError(f"malformed transcript: {exc!r}") from exc
# endregion


# region Reports
def finding_to_json(finding: Finding, election: Optional[Election] = None) -> dict[str, Any]:
    document: dict[str, Any] = {
        "kind": finding.kind.value,
        "count_index": finding.count_index,
        "candidates": list(finding.candidates),
        "evidence": finding.evidence,
    }
    if election is not None:
        document["candidate_names"] = election.names(finding.candidates)
    return document


def report_to_json(report: AnomalyReport, election: Optional[Election] = None) -> str:
    return dumps({
        "format": REPORT_FORMAT,
        "version": FORMAT_VERSION,
        "findings": [finding_to_json(f, election) for f in report.findings],
    })


def parse_report(source: str) -> AnomalyReport:
    try:
        data = json.loads(source)
        return AnomalyReport(tuple(
            Finding(FindingKind(f["kind"]), f["count_index"], tuple(f["candidates"]), f.get("evidence", {}))
            for f in data["findings"]
        ))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise TranscriptFormatError(f"malformed report: {exc!r}") from exc
# endregion


def render_transcript_table(t: CountTranscript) -> str:
    """ Count-by-count table of tallies, exhausted value and rounding loss """
    names = [c.name for c in t.election.candidates]
    header = ["Count", "Action"] + names + ["Exhausted", "Loss", "Elected"]
    rows: list[list[str]] = []
    for step in t.steps:
        match step.action.kind:
            case ActionKind.FIRST_PREFERENCES:
                action = "first prefs"
            case ActionKind.SURPLUS:
                action = f"surplus {names[step.action.candidate]}"
            case ActionKind.EXCLUSION:
                action = f"exclude {names[step.action.candidate]}"
                if step.action.batches and step.action.batches > 1:
                    action += f" ({step.action.batch}/{step.action.batches})"
        rows.append(
            [str(step.index), action]
            + [format_rational(x) for x in step.tallies]
            + [format_rational(step.exhausted_value), format_rational(step.rounding_loss),
               ", ".join(names[c] for c in step.elected_now)]
        )

    widths = [max(len(row[i]) for row in [header] + rows) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in [header] + rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    lines.append(f"Quota {t.quota.value}; elected: {', '.join(t.election.names(t.winners))}")
    return "\n".join(lines) + "\n"
