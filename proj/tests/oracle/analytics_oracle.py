#!/usr/bin/env python3
"""Reference implementation of the usage-analytics report.

Written separately from the C++ pipeline, with exact fractions and regular
expressions, to cross-check its output field by field.
"""
import argparse
import ipaddress
import json
import re
import sys
from collections import defaultdict
from datetime import datetime, timezone
from fractions import Fraction

LABELS = [
    "no specific category",
    "Search & Get Recommendation",
    "Plan & Organize",
    "Communicate & Collaborate",
    "Create & Modify",
    "Train & Test",
    "Explore & View Content",
    "Reflect & Evaluate",
]
OPS = ["space.create", "space.join", "space.leave", "space.load",
       "widget.add", "widget.remove", "widget.load"]
STATIC_EXT = {".js", ".css", ".png", ".jpg", ".jpeg", ".gif", ".svg", ".ico",
              ".woff", ".woff2", ".ttf", ".map", ".html"}
QUOTED = r'"((?:[^"\\]|\\.)*)"'
CLF = re.compile(r'^(\S+) \S+ \S+ \[([^\]]*)\] ' + QUOTED + r' (\d{3}) (\d+|-)'
                 r'(?: ' + QUOTED + r'(?: ' + QUOTED + r')?)?')
SPACE_NAME = re.compile(r'^[A-Za-z0-9._~-]{1,64}$')
DAY_MS = 86_400_000


def unescape(s):
    return re.sub(r'\\(.)', r'\1', s)


def url_decode(s):
    s = s.replace('+', ' ')
    return re.sub(r'%([0-9A-Fa-f]{2})', lambda m: chr(int(m.group(1), 16)), s)


def parse_clf(line):
    m = CLF.match(line.rstrip('\r\n'))
    if not m:
        return None
    ip, when, request, status, size, _ref, agent = m.groups()
    try:
        ts = datetime.strptime(when, '%d/%b/%Y:%H:%M:%S %z')
    except ValueError:
        return None
    request = unescape(request)
    parts = request.split(' ')
    if len(parts) < 2 or not parts[0] or not parts[1]:
        return None
    status = int(status)
    if not 100 <= status <= 599:
        return None
    return {
        'ip': ip,
        'ts': int(ts.timestamp()) * 1000,
        'method': parts[0],
        'target': parts[1],
        'status': status,
        'bytes': 0 if size == '-' else int(size),
        'ua': unescape(agent) if agent is not None else '',
    }


def parse_event(line):
    try:
        e = json.loads(line)
        verb, space = e['verb'], e.get('space') or ''
        actor, ts, oid = e['actor'], int(e['ts']), e['object_id']
    except (ValueError, KeyError, TypeError):
        return None
    widget = (e.get('details') or {}).get('widget_id', '')
    wq = '?widget=' + widget if widget else ''
    base = '/api/spaces/' + space
    routes = {
        'space.create': ('POST', '/api/spaces?name=' + space),
        'space.load': ('GET', base),
        'space.join': ('POST', base + '/members'),
        'space.leave': ('DELETE', base + '/members'),
        'widget.add': ('POST', base + '/widgets' + wq),
        'widget.remove': ('DELETE', base + '/widgets/' + oid + wq),
        'widget.load': ('GET', base + '/widgets/' + oid + wq),
    }
    method, target = routes.get(verb, ('POST', '/api/events/' + verb))
    return {'ip': actor, 'ts': ts, 'method': method, 'target': target,
            'status': 200, 'bytes': 0, 'ua': 'role-event-log'}


def config_lines(path):
    if not path:
        return []
    with open(path, encoding='utf-8') as f:
        return [(n, l.strip()) for n, l in enumerate(f, 1)
                if l.strip() and not l.strip().startswith('#')]


def load_bots(path):
    subs, regexes = [], []
    for _, line in config_lines(path):
        if line.startswith('re:'):
            regexes.append(re.compile(line[3:].strip(), re.I))
        else:
            subs.append(line.lower())
    return lambda ua: any(s in ua.lower() for s in subs) or any(r.search(ua.lower()) for r in regexes)


def ipv4(s):
    try:
        return ipaddress.IPv4Address(s)
    except ValueError:
        return None


def load_partners(path):
    nets, ids = [], set()
    for _, line in config_lines(path):
        if line.startswith('id:'):
            ids.add(line[3:].strip())
        else:
            nets.append(ipaddress.IPv4Network(line, strict=False))

    def contains(ip):
        if ip in ids:
            return True
        a = ipv4(ip)
        return a is not None and any(a in n for n in nets)
    return contains


def load_geo(path):
    table = []
    for i, (_, line) in enumerate(config_lines(path)):
        if i == 0 and line.startswith('prefix'):
            continue
        prefix, city, country = [x.strip() for x in line.split(',')]
        table.append((ipaddress.IPv4Network(prefix, strict=False), city, country))

    def lookup(ip):
        a = ipv4(ip)
        best = None
        if a is not None:
            for net, city, country in table:
                if a in net and (best is None or net.prefixlen > best[0]):
                    best = (net.prefixlen, city, country)
        return ('unknown', 'unknown') if best is None else (best[1], best[2])
    return lookup


def is_static(path):
    if path.startswith('/static/') or path.startswith('/assets/') or path == '/favicon.ico':
        return True
    name = path.rsplit('/', 1)[-1]
    return '.' in name and name[name.rfind('.'):].lower() in STATIC_EXT


def query_param(target, key):
    if '?' not in target:
        return None
    for pair in target.split('?', 1)[1].split('&'):
        k, _, v = pair.partition('=')
        if k == key:
            return url_decode(v)
    return None


def classify(e):
    if e['status'] >= 400:
        return None
    path = e['target'].split('?', 1)[0]
    seg = [s for s in path.split('/') if s]
    if len(seg) < 2 or seg[:2] != ['api', 'spaces']:
        return None
    m = e['method']
    widget = query_param(e['target'], 'widget') or ''
    if len(seg) == 2:
        name = query_param(e['target'], 'name')
        if m != 'POST' or name is None:
            return None
        op, space = 'space.create', name
    else:
        space = url_decode(seg[2])
        shape = (len(seg), seg[3] if len(seg) > 3 else None, m)
        table = {
            (3, None, 'GET'): 'space.load',
            (4, 'members', 'POST'): 'space.join',
            (4, 'members', 'DELETE'): 'space.leave',
            (4, 'widgets', 'POST'): 'widget.add',
            (5, 'widgets', 'DELETE'): 'widget.remove',
            (5, 'widgets', 'GET'): 'widget.load',
        }
        op = table.get(shape)
        if op is None or (op == 'widget.add' and not widget):
            return None
    if not SPACE_NAME.match(space):
        return None
    return {'op': op, 'actor': e['ip'], 'space': space, 'widget': widget, 'ts': e['ts']}


def tenths_half_up(x):
    """x is a Fraction; returns round-half-up of 10*x."""
    v = x * 10 + Fraction(1, 2)
    return v.numerator // v.denominator


def percent(num, den):
    if den == 0:
        return None
    return tenths_half_up(Fraction(num, den) * 100) / 10


def largest_remainder(weights, total):
    if total == 0:
        return {l: None for l in LABELS}
    scaled = [weights.get(l, Fraction(0)) / total * 1000 for l in LABELS]
    floors = [s.numerator // s.denominator for s in scaled]
    rema = [s - f for s, f in zip(scaled, floors)]
    missing = 1000 - sum(floors)
    order = sorted(range(len(LABELS)), key=lambda i: -rema[i])  # stable
    for i in order[:missing]:
        floors[i] += 1
    return {l: floors[i] / 10 for i, l in enumerate(LABELS)}


def frac_str(f):
    return f'{f.numerator}/{f.denominator}'


def day_string(day):
    return datetime.fromtimestamp(day * 86400, tz=timezone.utc).strftime('%Y-%m-%d')


def report(args):
    with open(args.log, 'rb') as f:
        raw = [l.decode('utf-8', errors='surrogateescape').rstrip('\n').rstrip('\r') for l in f]
    lines = [l for l in raw if l.strip(' \t')]
    events = bool(lines) and lines[0].lstrip(' \t').startswith('{')
    parsed = [(parse_event if events else parse_clf)(l) for l in lines]
    entries = [e for e in parsed if e is not None]

    bot = load_bots(args.bots)
    partner = load_partners(args.partners)
    geo = load_geo(args.geo)
    removed = {'bot': 0, 'partner': 0, 'static': 0}
    kept = []
    for e in entries:
        path = e['target'].split('?', 1)[0]
        if bot(e['ua']):
            removed['bot'] += 1
        elif partner(e['ip']):
            removed['partner'] += 1
        elif is_static(path):
            removed['static'] += 1
        else:
            kept.append(e)

    api = [e for e in kept if e['target'].split('?', 1)[0] == '/api'
           or e['target'].split('?', 1)[0].startswith('/api/')]
    ops, unclassified = [], 0
    for e in api:
        op = classify(e)
        if op is None:
            unclassified += 1
        else:
            ops.append(op)

    by_day = defaultdict(lambda: {'requests': 0, 'bytes': 0, 'ips': set()})
    for e in kept:
        d = by_day[e['ts'] // DAY_MS]
        d['requests'] += 1
        d['bytes'] += e['bytes']
        d['ips'].add(e['ip'])
    daily, cumulative = [], 0
    for day in sorted(by_day):
        d = by_day[day]
        cumulative += d['requests']
        daily.append({'day': day_string(day), 'requests': d['requests'], 'cumulative': cumulative,
                      'bytes': d['bytes'], 'distinct_ips': len(d['ips'])})

    cities = defaultdict(lambda: [0, set()])
    countries = defaultdict(lambda: [0, set()])
    for e in kept:
        city, country = geo(e['ip'])
        cities[(city, country)][0] += 1
        cities[(city, country)][1].add(e['ip'])
        countries[country][0] += 1
        countries[country][1].add(e['ip'])

    srl_widgets = set()
    with open(args.catalog, encoding='utf-8') as f:
        catalog = json.load(f)
    cats_of = {w['id']: w.get('categories', []) for w in catalog['widgets']}
    if args.srl_widgets:
        srl_widgets = {l for _, l in config_lines(args.srl_widgets)}
    else:
        srl_widgets = {w['id'] for w in catalog['widgets'] if w.get('srl')}

    spaces = {}
    for op in ops:
        s = spaces.setdefault(op['space'], {'first': op['ts'], 'last': op['ts'], 'created': False, 'loads': 0,
                                            'days': set(), 'srl_add': False, 'srl_load': False})
        s['first'] = min(s['first'], op['ts'])
        s['last'] = max(s['last'], op['ts'])
        if op['op'] == 'space.create':
            s['created'] = True
        elif op['op'] == 'space.load':
            s['loads'] += 1
            s['days'].add(op['ts'] // DAY_MS)
        elif op['op'] == 'widget.add' and op['widget'] in srl_widgets:
            s['srl_add'] = True
        elif op['op'] == 'widget.load' and op['widget'] in srl_widgets:
            s['srl_load'] = True
    for s in spaces.values():
        s['active'] = s['loads'] >= max(args.active_loads, 0) and len(s['days']) >= max(args.active_days, 0)
        s['srl'] = s['srl_add'] and s['srl_load']
        s['lifetime'] = s['last'] // DAY_MS - s['first'] // DAY_MS
    srl_spaces = [s for s in spaces.values() if s['srl']]
    mean_life = Fraction(sum(s['lifetime'] for s in srl_spaces), len(srl_spaces)) if srl_spaces else None

    actors = defaultdict(set)
    for op in ops:
        actors[op['op']].add(op['actor'])
    active_users = len({op['actor'] for op in ops})

    dist = {k: {'adds': 0, 'w': defaultdict(Fraction)} for k in ('srl', 'non_srl', 'all')}
    for op in ops:
        if op['op'] != 'widget.add':
            continue
        cohort = 'srl' if spaces[op['space']]['srl'] else 'non_srl'
        cats = cats_of.get(op['widget']) or ['no specific category']
        for k in (cohort, 'all'):
            dist[k]['adds'] += 1
            for c in cats:
                dist[k]['w'][c] += Fraction(1, len(cats))

    def distribution(d):
        n = d['adds']
        return {
            'adds': n,
            'percent': largest_remainder(d['w'], n),
            'exact': {l: (frac_str(d['w'].get(l, Fraction(0)) / n) if n else None) for l in LABELS},
        }

    widgets = defaultdict(lambda: {'adds': 0, 'loads': 0})
    for op in ops:
        if op['widget'] and op['op'] == 'widget.add':
            widgets[op['widget']]['adds'] += 1
        if op['widget'] and op['op'] == 'widget.load':
            widgets[op['widget']]['loads'] += 1

    all_ips = {e['ip'] for e in kept}
    city_rows = sorted(([k[0], k[1], v[0], len(v[1])] for k, v in cities.items()),
                       key=lambda r: (-r[2], r[1], r[0]))
    country_rows = sorted(([k, v[0], len(v[1])] for k, v in countries.items()), key=lambda r: (-r[1], r[0]))
    active = sum(s['active'] for s in spaces.values())
    srl_active = sum(s['active'] for s in srl_spaces)

    def cohort(name):
        n = len(actors[name])
        return {'count': n, 'percent': percent(n, active_users)}

    return {
        'parameters': {'active_loads': args.active_loads, 'active_days': args.active_days},
        'totals': {
            'raw_lines': len(lines),
            'malformed': len(lines) - len(entries),
            'parsed': len(entries),
            'removed_bots': removed['bot'],
            'removed_partners': removed['partner'],
            'removed_static': removed['static'],
            'cleaned': len(kept),
            'api_requests': len(api),
            'classified': len(ops),
            'unclassified': unclassified,
            'distinct_ips': len(all_ips),
            'distinct_cities': sum(1 for k in cities if k != ('unknown', 'unknown')),
            'distinct_countries': sum(1 for k in countries if k != 'unknown'),
        },
        'daily': daily,
        'operations': {**{o: sum(1 for op in ops if op['op'] == o) for o in OPS}, 'unclassified': unclassified},
        'spaces': {
            'seen': len(spaces),
            'created': sum(s['created'] for s in spaces.values()),
            'active': active,
            'active_percent': percent(active, len(spaces)),
            'srl_enabled': len(srl_spaces),
            'srl_active': srl_active,
            'srl_active_percent': percent(srl_active, len(srl_spaces)),
            'mean_srl_lifetime_days': None if mean_life is None else tenths_half_up(mean_life) / 10,
            'mean_srl_lifetime_days_exact': None if mean_life is None else frac_str(mean_life),
        },
        'users': {
            'active_users': active_users,
            'creators': cohort('space.create'),
            'joiners': cohort('space.join'),
            'widget_adders': cohort('widget.add'),
            're_openers': cohort('space.load'),
        },
        'categories': {k: distribution(dist[k]) for k in ('srl', 'non_srl', 'all')},
        'widgets': [{'widget': w, **widgets[w]} for w in sorted(widgets)],
        'geo': {
            'cities': [{'city': r[0], 'country': r[1], 'requests': r[2], 'distinct_ips': r[3]} for r in city_rows],
            'countries': [{'country': r[0], 'requests': r[1], 'distinct_ips': r[2]} for r in country_rows],
        },
    }


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument('--log', required=True)
    p.add_argument('--bots')
    p.add_argument('--partners')
    p.add_argument('--geo')
    p.add_argument('--srl-widgets')
    p.add_argument('--catalog', required=True)
    p.add_argument('--active-loads', type=int, default=5)
    p.add_argument('--active-days', type=int, default=2)
    p.add_argument('--out')
    args = p.parse_args()
    text = json.dumps(report(args), indent=2)
    if args.out:
        with open(args.out, 'w', encoding='utf-8') as f:
            f.write(text + '\n')
    else:
        sys.stdout.write(text + '\n')


if __name__ == '__main__':
    main()
