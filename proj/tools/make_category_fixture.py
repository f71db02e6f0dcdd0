#!/usr/bin/env python3
"""Builds the access-log fixture whose widget-category shares match the
published SRL vs. non-SRL category comparison.

Each cohort gets 1000 single-category widget adds, so every share is an exact
tenth of a percent. SRL spaces add and load an SRL widget; the other spaces may
add SRL widgets but never load them.
"""
import argparse
import json
import random
from datetime import datetime, timedelta, timezone

# adds per category out of 1000 for each cohort
TARGET = {
    'srl': {'no specific category': 588, 'Plan & Organize': 130, 'Reflect & Evaluate': 47,
            'Communicate & Collaborate': 80, 'Train & Test': 50, 'Explore & View Content': 45,
            'Search & Get Recommendation': 35, 'Create & Modify': 25},
    'non_srl': {'no specific category': 648, 'Plan & Organize': 87, 'Reflect & Evaluate': 26,
                'Communicate & Collaborate': 120, 'Train & Test': 40, 'Explore & View Content': 35,
                'Search & Get Recommendation': 25, 'Create & Modify': 19},
}
SPACES_PER_COHORT = 20
START = datetime(2012, 3, 1, tzinfo=timezone.utc)
AGENT = 'Mozilla/5.0 (X11; Linux x86_64; rv:15.0) Gecko/20100101 Firefox/15.0'


def clf(ip, when, method, target, status):
    stamp = when.strftime('%d/%b/%Y:%H:%M:%S +0000')
    return f'{ip} - - [{stamp}] "{method} {target} HTTP/1.1" {status} 512 "-" "{AGENT}"'


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument('--catalog', required=True)
    p.add_argument('--out', required=True)
    p.add_argument('--expected', required=True)
    args = p.parse_args()

    with open(args.catalog, encoding='utf-8') as f:
        widgets = json.load(f)['widgets']
    srl = {w['id'] for w in widgets if w.get('srl')}
    by_category = {}
    for w in widgets:
        cats = w.get('categories') or []
        if len(cats) <= 1:
            by_category.setdefault(cats[0] if cats else 'no specific category', []).append(w['id'])

    rng = random.Random(59)
    lines, clock = [], [START]

    def emit(ip, method, target, status=200):
        clock[0] += timedelta(seconds=37)
        lines.append(clf(ip, clock[0], method, target, status))

    for cohort, counts in TARGET.items():
        adds = []
        for category, n in counts.items():
            pool = sorted(by_category[category])
            if cohort == 'srl':
                candidates = pool
            else:
                # non-SRL spaces add SRL widgets only where no other widget exists
                candidates = [w for w in pool if w not in srl] or pool
            adds += [candidates[i % len(candidates)] for i in range(n)]
        if cohort == 'srl':
            # one SRL anchor widget per space, taken from the no-category share
            for _ in range(SPACES_PER_COHORT):
                adds.remove('self_reflection') if 'self_reflection' in adds else None
        rng.shuffle(adds)

        spaces = [f'{cohort.replace("_", "-")}-{i:02d}' for i in range(SPACES_PER_COHORT)]
        for i, space in enumerate(spaces):
            owner = f'10.{1 if cohort == "srl" else 2}.{i}.1'
            emit(owner, 'POST', f'/api/spaces?name={space}', 201)
            instance = 1
            if cohort == 'srl':
                emit(owner, 'POST', f'/api/spaces/{space}/widgets?widget=self_reflection', 201)
                emit(owner, 'GET', f'/api/spaces/{space}/widgets/i1?widget=self_reflection')
                instance = 2
            share = adds[i::SPACES_PER_COHORT]
            for w in share:
                emit(owner, 'POST', f'/api/spaces/{space}/widgets?widget={w}', 201)
                if w not in srl:
                    emit(owner, 'GET', f'/api/spaces/{space}/widgets/i{instance}?widget={w}')
                instance += 1
            for day in range(3):
                clock[0] += timedelta(hours=8)
                emit(owner, 'GET', f'/api/spaces/{space}')
                emit(owner, 'GET', f'/api/spaces/{space}')
                emit(f'10.3.{i}.{day + 1}', 'POST', f'/api/spaces/{space}/members', 200)

    with open(args.out, 'w', encoding='utf-8') as f:
        f.write('\n'.join(lines) + '\n')

    # independent tally of what the fixture encodes, in percent
    expected = {}
    for cohort, counts in TARGET.items():
        total = sum(counts.values())
        expected[cohort] = {k: round(v * 100 / total, 1) for k, v in counts.items()}
    with open(args.expected, 'w', encoding='utf-8') as f:
        json.dump(expected, f, indent=2)
        f.write('\n')


if __name__ == '__main__':
    main()
