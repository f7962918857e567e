class Source {
public:
  int counter;
  int keep;
};
class Target {
public:
  int other;
};
