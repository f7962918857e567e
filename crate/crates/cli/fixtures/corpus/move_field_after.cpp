class Source {
public:
  int keep;
};
class Target {
public:
  int other;
  int counter;
};
