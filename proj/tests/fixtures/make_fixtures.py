#!/usr/bin/env python3
"""Regenerates the SQLite databases, the mini dataset and its scripted mock.

Run from anywhere: python3 tests/fixtures/make_fixtures.py
The outputs are committed; rerunning must leave them byte-identical.
"""
import json
import os
import sqlite3

HERE = os.path.dirname(os.path.abspath(__file__))
MINI = os.path.join(HERE, "mini")

MUSIC_DDL = """
CREATE TABLE singer (
  singer_id INTEGER PRIMARY KEY,
  name TEXT,
  country TEXT,
  age INTEGER,
  net_worth REAL
);
CREATE TABLE concert (
  concert_id INTEGER PRIMARY KEY,
  concert_name TEXT,
  venue TEXT,
  year INTEGER
);
CREATE TABLE singer_in_concert (
  concert_id INTEGER REFERENCES concert(concert_id),
  singer_id INTEGER REFERENCES singer(singer_id),
  PRIMARY KEY (concert_id, singer_id)
);
INSERT INTO singer VALUES
  (1, 'Joe Sharp', 'Netherlands', 52, 30.0),
  (2, 'Timbaland', 'United States', 32, 1.5),
  (3, 'Justin Brown', 'France', 29, 12.0),
  (4, 'Rose White', 'France', 41, 8.25),
  (5, 'John Nizinik', 'France', 43, 2.0),
  (6, 'Tribal King', 'France', 25, 0.75),
  (7, 'Ann Fisher', 'United States', 36, 5.5);
INSERT INTO concert VALUES
  (1, 'Auditions', 'Finland Stadium', 2014),
  (2, 'Super bootcamp', 'Somerset Park', 2014),
  (3, 'Home Visits', 'Hampden Park', 2015),
  (4, 'Week 1', 'Glebe Park', 2015),
  (5, 'Week 2', 'Balmoor', 2016);
INSERT INTO singer_in_concert VALUES
  (1, 2), (1, 3), (1, 5), (2, 3), (2, 6), (3, 5), (4, 4), (5, 6), (5, 3);
"""

SCHOOL_DDL = """
CREATE TABLE student (
  student_id INTEGER PRIMARY KEY,
  name TEXT,
  major TEXT,
  gpa REAL,
  age INTEGER
);
CREATE TABLE course (
  course_id INTEGER PRIMARY KEY,
  title TEXT,
  credits INTEGER
);
CREATE TABLE enrollment (
  student_id INTEGER REFERENCES student(student_id),
  course_id INTEGER REFERENCES course(course_id),
  grade TEXT
);
CREATE TABLE department (
  dept_id INTEGER PRIMARY KEY,
  dept_name TEXT,
  building TEXT
);
INSERT INTO student VALUES
  (1, 'Ava Lee', 'Biology', 3.6, 20),
  (2, 'Ben Ortiz', 'History', 2.9, 22),
  (3, 'Cara Singh', 'Biology', 3.9, 19),
  (4, 'Dan Moore', 'Physics', 3.2, 21),
  (5, 'Eve Park', 'History', 2.5, 23),
  (6, 'Finn Walsh', 'Physics', 3.7, 20);
INSERT INTO course VALUES
  (10, 'Genetics', 4),
  (11, 'Modern Europe', 3),
  (12, 'Mechanics', 4),
  (13, 'Statistics', 2);
INSERT INTO enrollment VALUES
  (1, 10, 'A'), (3, 10, 'A'), (2, 11, 'B'), (5, 11, 'C'), (4, 12, 'A'),
  (6, 12, 'B'), (1, 13, 'B'), (6, 13, 'A');
INSERT INTO department VALUES
  (1, 'Physics', 'North Hall'),
  (2, 'Biology', 'Life Sciences'),
  (3, 'History', 'Old Library');
"""

EXAMPLES = [
    ("music", "How many singers do we have?", "SELECT count(*) FROM singer"),
    ("music", "Show the name and country of singers older than 30, oldest first.",
     "SELECT name, country FROM singer WHERE age > 30 ORDER BY age DESC"),
    ("music", "How many singers come from each country?",
     "SELECT country, count(*) FROM singer GROUP BY country"),
    ("music", "What are the average, maximum and minimum ages of singers from France?",
     "SELECT avg(age), max(age), min(age) FROM singer WHERE country = 'France'"),
    ("music", "For each concert, list its name and the number of singers performing.",
     "SELECT T2.concert_name, count(*) FROM singer_in_concert AS T1 JOIN concert AS T2 "
     "ON T1.concert_id = T2.concert_id GROUP BY T2.concert_id"),
    ("music", "List the names of singers who never performed in a concert.",
     "SELECT name FROM singer WHERE singer_id NOT IN (SELECT singer_id FROM singer_in_concert)"),
    ("music", "Which singers performed in a concert held in 2014?",
     "SELECT T1.name FROM singer AS T1 JOIN singer_in_concert AS T2 ON T1.singer_id = T2.singer_id "
     "JOIN concert AS T3 ON T2.concert_id = T3.concert_id WHERE T3.year = 2014"),
    ("music", "Which venues hosted concerts in 2014 or 2015?",
     "SELECT venue FROM concert WHERE year = 2014 UNION SELECT venue FROM concert WHERE year = 2015"),
    ("music", "Which singers have a net worth above the average?",
     "SELECT name FROM singer WHERE net_worth > (SELECT avg(net_worth) FROM singer)"),
    ("music", "Which countries have more than one singer?",
     "SELECT country FROM singer GROUP BY country HAVING count(*) > 1"),
    ("school", "How many students are there?", "SELECT count(*) FROM student"),
    ("school", "Who are the three students with the highest GPA?",
     "SELECT name, gpa FROM student ORDER BY gpa DESC LIMIT 3"),
    ("school", "What is the average GPA for each major?",
     "SELECT major, avg(gpa) FROM student GROUP BY major"),
    ("school", "Which students received an A grade?",
     "SELECT T1.name FROM student AS T1, enrollment AS T2 "
     "WHERE T1.student_id = T2.student_id AND T2.grade = 'A'"),
    ("school", "Which courses have at least two enrolled students?",
     "SELECT title FROM course WHERE course_id IN "
     "(SELECT course_id FROM enrollment GROUP BY course_id HAVING count(*) >= 2)"),
    ("school", "List the distinct names of students taking a four credit course.",
     "SELECT DISTINCT T1.name FROM student AS T1 JOIN enrollment AS T2 ON T1.student_id = T2.student_id "
     "JOIN course AS T3 ON T2.course_id = T3.course_id WHERE T3.credits = 4"),
    ("school", "What is the total number of credits across all courses?", "SELECT sum(credits) FROM course"),
    ("school", "What is the name of the youngest student?",
     "SELECT name FROM student WHERE age = (SELECT min(age) FROM student)"),
    ("school", "List every department name with its building, alphabetically.",
     "SELECT dept_name, building FROM department ORDER BY dept_name"),
    ("school", "How many majors have an average GPA above 3.0?",
     "SELECT count(*) FROM (SELECT major FROM student GROUP BY major HAVING avg(gpa) > 3.0)"),
]

PARAPHRASE_TEMPLATES = [
    "Please tell me: {q}",
    "I would like to know: {q}",
    "Question for the database: {q}",
    "Can you find out: {q}",
    "Quick query: {q}",
    "Help me answer this: {q}",
    "From the data: {q}",
    "Looking at the records: {q}",
    "Kindly determine: {q}",
    "One more thing: {q}",
]
MISPREDICTED_VARIANTS = {3, 8}

# Canonical column types as Spider's tables.json records them.
SPIDER_TYPES = {"INTEGER": "number", "REAL": "number", "TEXT": "text"}


def build_db(path, ddl):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    if os.path.exists(path):
        os.remove(path)
    con = sqlite3.connect(path)
    con.executescript(ddl)
    con.commit()
    con.execute("VACUUM")
    con.close()


def schema_entry(db_id, path):
    con = sqlite3.connect(path)
    tables = [r[0] for r in con.execute(
        "SELECT name FROM sqlite_master WHERE type='table' ORDER BY rowid")]
    column_names = [[-1, "*"]]
    column_types = ["text"]
    primary_keys = []
    foreign_keys = []
    index = {}
    for t_idx, table in enumerate(tables):
        for cid, name, ctype, _notnull, _default, pk in con.execute(f"PRAGMA table_info({table})"):
            index[(table, name)] = len(column_names)
            column_names.append([t_idx, name])
            column_types.append(SPIDER_TYPES[ctype.upper()])
            if pk:
                primary_keys.append(index[(table, name)])
    for table in tables:
        for row in con.execute(f"PRAGMA foreign_key_list({table})"):
            foreign_keys.append([index[(table, row[3])], index[(row[2], row[4])]])
    con.close()
    return {
        "db_id": db_id,
        "table_names_original": tables,
        "table_names": [t.replace("_", " ") for t in tables],
        "column_names_original": column_names,
        "column_names": [[t, n.replace("_", " ")] for t, n in column_names],
        "column_types": column_types,
        "primary_keys": primary_keys,
        "foreign_keys": foreign_keys,
    }


def build_exec_fixture():
    path = os.path.join(HERE, "exec", "exec.sqlite")
    rows = ",".join(f"({i})" for i in range(1, 2001))
    build_db(path, f"""
CREATE TABLE item (id INTEGER PRIMARY KEY, label TEXT, price REAL, qty INTEGER, note TEXT);
INSERT INTO item VALUES
  (1, 'apple', 1.5, 3, NULL),
  (2, 'pear', 2.0, 3, 'ripe'),
  (3, 'plum', 0.1, 7, 'ripe'),
  (4, 'fig', 3.0, NULL, NULL),
  (5, 'kiwi', 2.0, 1, 'sour  ');
CREATE TABLE big (n INTEGER);
INSERT INTO big VALUES {rows};
""")


def main():
    build_exec_fixture()

    dbs = {"music": MUSIC_DDL, "school": SCHOOL_DDL}
    tables = []
    for db_id, ddl in dbs.items():
        path = os.path.join(MINI, "database", db_id, f"{db_id}.sqlite")
        build_db(path, ddl)
        tables.append(schema_entry(db_id, path))

    dev = [{"db_id": db, "question": q, "query": sql} for db, q, sql in EXAMPLES]
    with open(os.path.join(MINI, "dev.json"), "w") as f:
        json.dump(dev, f, indent=2)
        f.write("\n")
    with open(os.path.join(MINI, "tables.json"), "w") as f:
        json.dump(tables, f, indent=2)
        f.write("\n")

    rules = []
    for db_id, question, sql in EXAMPLES:
        listing = "".join(f"{i + 1}. {t.format(q=question)}\n" for i, t in enumerate(PARAPHRASE_TEMPLATES))
        rules.append({"contains": f"SQL Query:\n{sql}\n", "response": listing})
    for db_id, question, sql in EXAMPLES:
        rules.append({"contains": f"Question:\n{question}\n", "response": f"```sql\n{sql}\n```"})
        for i, t in enumerate(PARAPHRASE_TEMPLATES):
            answer = f"SELECT * FROM ({sql}) WHERE 0" if i in MISPREDICTED_VARIANTS else sql
            rules.append({"contains": f"Question:\n{t.format(q=question)}\n", "response": f"```sql\n{answer}\n```"})
    with open(os.path.join(MINI, "mock_script.json"), "w") as f:
        json.dump({"rules": rules}, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
