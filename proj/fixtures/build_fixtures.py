#!/usr/bin/env python3
"""Regenerates documents.jsonl, injected.jsonl and mini_gold.jsonl.

The fixture text lives here; ids and pair keys are derived with hashlib so
the shipped files stay consistent when a sentence is edited. Run from any
directory: python3 fixtures/build_fixtures.py
"""

import hashlib
import json
import os

HERE = os.path.dirname(os.path.abspath(__file__))
ORG = "Aerodyne Systems"


def norm(s):
    return " ".join(s.split())


def pair_key(c1, c2, mode):
    a, b = norm(c1), norm(c2)
    if mode == "self" and b < a:
        a, b = b, a
    return hashlib.sha256((a + "\x1f" + b).encode()).hexdigest()


def doc_id(title, body):
    return "doc-" + hashlib.sha256((title + "\n" + body).encode()).hexdigest()[:16]


# name, domain, subdomain, doc_type, date, department, location, paragraphs
DOCS = [
    ("cl-1", "Contract Law", "Non-Disclosure Agreements", "Agreement", "2024-02-12",
     "Legal Affairs", "Seattle, U.S.", [
         ["This Mutual Non-Disclosure Agreement governs every exchange of Confidential Information between Aerodyne Systems and the Vendor.",
          "Guidance: Issued by Compliance Office.",
          "The agreement takes effect on February 12, 2024 and remains in force for five years."],
         ["The Vendor shall restrict access to Confidential Information to employees with a documented need to know.",
          "All copies of technical drawings must be returned within 10 business days of a written request."],
         ["The Vendor shall not disclose Confidential Information to third parties without prior written consent from Aerodyne Systems.",
          "Breaches of this clause result in immediate termination of the supply contract."],
         ["Notices under this agreement are sent to the Legal Affairs office in Seattle.",
          "This agreement is governed by the laws of the State of Washington."]]),
    ("cl-2", "Contract Law", "Non-Disclosure Agreements", "Agreement", "2024-03-04",
     "Legal Affairs", "Seattle, U.S.", [
         ["This Supplemental Confidentiality Agreement extends the obligations of the Vendor under the master agreement with Aerodyne Systems.",
          "Guidance: Issued by Strategy Unit.",
          "The supplement takes effect on March 4, 2024 and expires with the master agreement."],
         ["The Vendor shall encrypt every stored copy of Confidential Information with keys held by Aerodyne Systems.",
          "All copies of technical drawings must be returned within 30 business days of a written request."],
         ["The Vendor is authorized to disclose Confidential Information to third parties immediately upon the termination of this Agreement.",
          "Audit rights under this supplement survive for three years after termination."],
         ["Notices under this supplement are sent to the Legal Affairs office in Seattle.",
          "This supplement is governed by the laws of the State of Washington."]]),
    ("cl-3", "Contract Law", "Licensing Agreements", "License", "2024-04-22",
     "Licensing Office", "Toulouse, France", [
         ["This Technology License grants the Licensee a non-exclusive right to use the AeroGuide navigation software.",
          "The license fee is 250,000 euros per year, payable in advance each January."],
         ["The Licensee shall not reverse engineer, decompile or sublicense the software.",
          "Support requests are answered by the Licensing Office in Toulouse within two business days."],
         ["Aerodyne Systems may audit the Licensee's usage records once per calendar year.",
          "Audit findings are reported to the Licensee within 20 business days."],
         ["Either party may terminate this license with 90 days of written notice.",
          "This license is governed by the laws of France."]]),
    ("ip-1", "Internal Policy and Governance", "Employee Conduct", "Policy", "2024-01-08",
     "Human Resources", "Munich, Germany", [
         ["This Expense Reimbursement Policy applies to every employee of Aerodyne Systems in Europe.",
          "Process: Submit via HR portal.",
          "Claims must be filed within 30 days of the expense date."],
         ["Travel in economy class is required for all flights shorter than six hours.",
          "Meals are reimbursed up to 60 euros per day with itemized receipts."],
         ["Managers approve claims within five business days of submission.",
          "Late claims are rejected unless the Human Resources director grants a written waiver."],
         ["Questions about this policy are directed to the Human Resources office in Munich.",
          "This policy is reviewed every January by the governance committee."]]),
    ("ip-2", "Internal Policy and Governance", "Employee Conduct", "Policy", "2024-02-19",
     "Human Resources", "Munich, Germany", [
         ["This Expense Procedures Memo sets out how employees of Aerodyne Systems in Europe file reimbursement claims.",
          "Process: Submit through admins.",
          "Claims must be filed within 45 days of the expense date."],
         ["Business class is permitted for all flights longer than four hours.",
          "Meals are reimbursed up to 60 euros per day with itemized receipts."],
         ["Managers approve claims within five business days of submission.",
          "Department administrators forward approved claims to payroll every Friday."],
         ["Questions about these procedures are directed to the Human Resources office in Munich.",
          "This memo is reviewed every January by the governance committee."]]),
    ("cr-1", "Compliance and Regulation", "Workplace Compliance", "Directive", "2024-05-06",
     "Compliance Office", "Singapore", [
         ["This Workplace Directive governs on-site attendance for the Singapore engineering center of Aerodyne Systems.",
          "Status: Remote work mandatory.",
          "The directive applies from May 6, 2024 to all staff on the avionics program."],
         ["Badge access to the cleanroom is limited to certified technicians.",
          "All staff complete export control training by June 30, 2024."],
         ["Aerodyne Systems is committed to submitting all required reports by March 30, 2024, without exceptions.",
          "The Compliance Office publishes a monthly attendance summary."],
         ["Questions are directed to the Compliance Office in Singapore.",
          "Violations are escalated to the regional compliance lead within 48 hours."]]),
    ("cr-2", "Compliance and Regulation", "Workplace Compliance", "Directive", "2024-06-10",
     "Compliance Office", "Singapore", [
         ["This Attendance Update revises on-site expectations for the Singapore engineering center of Aerodyne Systems.",
          "Status: Remote work not permitted.",
          "The update applies from June 10, 2024 to all staff on the avionics program."],
         ["Badge access to the cleanroom is limited to certified technicians.",
          "All staff complete export control training by September 30, 2024."],
         ["Aerodyne Systems will submit the required regulatory compliance reports by April 15, 2024.",
          "The Compliance Office publishes a monthly attendance summary."],
         ["Questions are directed to the Compliance Office in Singapore.",
          "Violations are escalated to the regional compliance lead within 48 hours."]]),
    ("dr-1", "Dispute Resolution and Litigation", "Arbitration", "Procedure", "2024-07-15",
     "Litigation Group", "London, U.K.", [
         ["This Arbitration Procedure governs disputes between Aerodyne Systems and its component suppliers.",
          "Timeline: Starts Jan 15.",
          "Each party appoints one arbitrator within 21 days of the notice of dispute."],
         ["Hearings take place at the London office of Aerodyne Systems.",
          "Timeline: Starts end of Q1.",
          "The tribunal issues its award within 60 days of the final hearing."],
         ["Costs of the arbitration are shared equally unless the tribunal orders otherwise.",
          "All submissions are made in English."],
         ["The Litigation Group maintains the case register for every dispute.",
          "Awards are final and binding on both parties."]]),
    ("dr-2", "Dispute Resolution and Litigation", "Claims Handling", "Procedure", "2024-08-19",
     "Litigation Group", "London, U.K.", [
         ["This Claims Handling Procedure applies to warranty claims raised against Aerodyne Systems.",
          "Scope: Applies globally.",
          "Claims are acknowledged within five business days of receipt."],
         ["The Litigation Group assesses each claim against the warranty terms in force at delivery.",
          "Settlements above 500,000 dollars require approval from the general counsel."],
         ["Scope: Applies only to APAC.",
          "Claim files are retained for seven years after closure."],
         ["Questions about this procedure are directed to the Litigation Group in London.",
          "This procedure is reviewed every December."]]),
    ("ts-1", "Terms and Service Management", "Service Level Agreements", "Terms", "2024-09-09",
     "Customer Operations", "Phoenix, U.S.", [
         ["These Service Terms govern maintenance support for operators of Aerodyne Systems aircraft.",
          "Finance: $12M surplus.",
          "Support requests are answered within four hours, every day of the year."],
         ["Scheduled maintenance windows are announced 14 days in advance.",
          "Finance: $5M deficit."],
         ["Operators receive a service credit of 5 percent for each missed response target.",
          "Credits are capped at 30 percent of the monthly fee."],
         ["Questions about these terms are directed to Customer Operations in Phoenix.",
          "These terms are governed by the laws of the State of Arizona."]]),
    ("ts-2", "Terms and Service Management", "Service Level Agreements", "Terms", "2024-10-14",
     "Customer Operations", "Phoenix, U.S.", [
         ["These Parts Supply Terms govern spare parts orders placed with Aerodyne Systems.",
          "Orders are shipped within three business days of confirmation."],
         ["Customers return defective parts within 30 days of delivery for a full refund.",
          "Expedited shipping is billed at cost."],
         ["Customers return defective parts within 10 days of delivery for a full refund.",
          "Invoices are payable within 45 days."],
         ["Questions about these terms are directed to Customer Operations in Phoenix.",
          "These terms are governed by the laws of the State of Arizona."]]),
    ("ts-3", "Terms and Service Management", "Warranty Terms", "Terms", "2024-11-18",
     "Customer Operations", "Phoenix, U.S.", [
         ["These Warranty Terms cover avionics units sold by Aerodyne Systems.",
          "Units are covered for 24 months from the date of installation."],
         ["Warranty repairs are performed at the Phoenix service center.",
          "Shipping costs for warranty repairs are paid by Aerodyne Systems."],
         ["Units are covered for 12 months from the date of installation.",
          "Damage caused by unauthorized modification voids the warranty."],
         ["Questions about these terms are directed to Customer Operations in Phoenix.",
          "These terms are reviewed every November."]]),
]

AUTHORITY = {"Agreement": "Executive", "License": "Executive", "Policy": "Departmental",
             "Directive": "Regulatory", "Procedure": "Departmental", "Terms": "Executive"}


def build_documents():
    docs = {}
    for name, domain, sub, dtype, date, dept, loc, paras in DOCS:
        body = "\n\n".join(" ".join(p) for p in paras)
        title = f"{sub} {dtype} ({name.upper()})"
        meta = {"title": title, "topic": sub, "date": date,
                "department": f"{dept}, {ORG}", "location": loc, "doc_type": dtype,
                "authority_level": AUTHORITY[dtype]}
        docs[name] = {"kind": "document", "id": doc_id(title, body), "metadata": meta,
                      "domain": domain, "subdomain": sub, "body": body, "ppl_base": 14.0,
                      "people_meta": [f"Director, {dept}"],
                      "doc_meta": [f"{dtype} reference {name.upper()}"],
                      "gen_attempts": 1, "trailer_warning": False}
    return docs


# (type, mode, source, host, target, contradiction)
INJECTED = [
    ("Temporal", "self", "dr-1", "dr-1", "Starts Jan 15", "Starts end of Q1"),
    ("Numerical", "self", "ts-1", "ts-1", "$12M surplus", "$5M deficit"),
    ("Authority", "pairwise", "cl-1", "cl-2", "Issued by Compliance Office", "Issued by Strategy Unit"),
    ("Process", "pairwise", "ip-1", "ip-2", "Submit via HR portal", "Submit through admins"),
    ("PolicyReversal", "pairwise", "cr-1", "cr-2", "Remote work mandatory", "Remote work not permitted"),
    ("Specificity", "self", "dr-2", "dr-2", "Applies globally", "Applies only to APAC"),
]

# Extra confirmed contradictions (sentence pairs already in the documents).
POSITIVES = [
    ("Numerical", "pairwise", "cl-1", "cl-2",
     "All copies of technical drawings must be returned within 10 business days of a written request.",
     "All copies of technical drawings must be returned within 30 business days of a written request."),
    ("PolicyReversal", "pairwise", "cl-1", "cl-2",
     "The Vendor shall not disclose Confidential Information to third parties without prior written consent from Aerodyne Systems.",
     "The Vendor is authorized to disclose Confidential Information to third parties immediately upon the termination of this Agreement."),
    ("Numerical", "pairwise", "ip-1", "ip-2",
     "Claims must be filed within 30 days of the expense date.",
     "Claims must be filed within 45 days of the expense date."),
    ("PolicyReversal", "pairwise", "ip-1", "ip-2",
     "Travel in economy class is required for all flights shorter than six hours.",
     "Business class is permitted for all flights longer than four hours."),
    ("Temporal", "pairwise", "cr-1", "cr-2",
     "All staff complete export control training by June 30, 2024.",
     "All staff complete export control training by September 30, 2024."),
    ("Temporal", "pairwise", "cr-1", "cr-2",
     "Aerodyne Systems is committed to submitting all required reports by March 30, 2024, without exceptions.",
     "Aerodyne Systems will submit the required regulatory compliance reports by April 15, 2024."),
    ("Numerical", "self", "ts-2", "ts-2",
     "Customers return defective parts within 30 days of delivery for a full refund.",
     "Customers return defective parts within 10 days of delivery for a full refund."),
    ("Numerical", "self", "ts-3", "ts-3",
     "Units are covered for 24 months from the date of installation.",
     "Units are covered for 12 months from the date of installation."),
]

# Pairs a detector might surface that do not contradict.
NEGATIVES = [
    ("self", "cl-1", "cl-1", 0, 1), ("self", "cl-1", "cl-1", 2, 3),
    ("self", "cl-2", "cl-2", 0, 3), ("self", "cl-3", "cl-3", 1, 2),
    ("self", "cl-3", "cl-3", 4, 6), ("self", "ip-1", "ip-1", 3, 4),
    ("self", "ip-2", "ip-2", 4, 6), ("self", "cr-1", "cr-1", 0, 3),
    ("self", "dr-1", "dr-1", 2, 5), ("self", "dr-2", "dr-2", 3, 4),
    ("self", "ts-1", "ts-1", 2, 5), ("self", "ts-2", "ts-2", 0, 1),
    ("pairwise", "cl-1", "cl-2", 7, 7), ("pairwise", "ip-1", "ip-2", 4, 4),
    ("pairwise", "cr-1", "cr-2", 3, 3), ("pairwise", "cr-1", "cr-2", 6, 6),
    ("pairwise", "ts-2", "ts-3", 7, 7), ("pairwise", "cl-1", "cl-3", 5, 7),
    ("pairwise", "dr-1", "dr-2", 6, 7), ("pairwise", "ip-1", "ip-2", 7, 7),
    ("pairwise", "ts-1", "ts-2", 7, 7), ("pairwise", "cl-2", "cl-3", 8, 7),
    ("pairwise", "ts-1", "ts-3", 6, 6), ("self", "cr-2", "cr-2", 1, 6),
    ("self", "ts-3", "ts-3", 2, 3), ("pairwise", "dr-1", "dr-2", 7, 7),
]


def sentences(name):
    for entry in DOCS:
        if entry[0] == name:
            return [s for p in entry[7] for s in p]
    raise KeyError(name)


def main():
    docs = build_documents()
    injected = []
    for ctype, mode, src, host, target, contr in INJECTED:
        s, h = docs[src], docs[host]
        assert norm(target) in norm(s["body"]), (src, target)
        assert norm(contr) in norm(h["body"]), (host, contr)
        if mode == "pairwise":
            assert norm(target) not in norm(h["body"]), (host, target)
        rid = "ctr-" + hashlib.sha256(
            "\x1f".join([mode, s["id"], h["id"], target, contr]).encode()).hexdigest()[:16]
        injected.append({"kind": "contradiction", "id": rid, "mode": mode, "ctype": ctype,
                         "target_statement": target, "contradiction_statement": contr,
                         "source_doc": s["id"], "host_doc": h["id"], "delta_rel": 0.02})

    gold = {}

    def add(mode, d1, d2, c1, c2, label, sources, ctype=None):
        assert norm(c1) in norm(docs[d1]["body"]), (d1, c1)
        assert norm(c2) in norm(docs[d2]["body"]), (d2, c2)
        key = pair_key(c1, c2, mode)
        assert key not in gold, (c1, c2)
        item = {"kind": "gold_item", "key": key, "mode": mode, "doc1": docs[d1]["id"],
                "doc2": docs[d2]["id"], "doc1_chunk": c1, "doc2_chunk": c2,
                "context1": c1, "context2": c2, "sources": sources, "adjudicated": False,
                "aliases": [], "unresolved": False, "human_label": label}
        if ctype:
            item["ctype"] = ctype
        gold[key] = item

    for ctype, mode, src, host, target, contr in INJECTED:
        add(mode, src, host, target, contr, 1, ["injected"], ctype)
    for ctype, mode, d1, d2, c1, c2 in POSITIVES:
        add(mode, d1, d2, c1, c2, 1, ["nli", "llm", "hybrid"], ctype)
    for mode, d1, d2, i, j in NEGATIVES:
        add(mode, d1, d2, sentences(d1)[i], sentences(d2)[j], 0, ["nli"])
    assert len(gold) == 40, len(gold)

    def dump(name, rows):
        with open(os.path.join(HERE, name), "w", encoding="utf-8") as f:
            for r in rows:
                f.write(json.dumps(r, ensure_ascii=False, sort_keys=True) + "\n")

    dump("documents.jsonl", docs.values())
    dump("injected.jsonl", injected)
    dump("mini_gold.jsonl", [gold[k] for k in sorted(gold)])


if __name__ == "__main__":
    main()
