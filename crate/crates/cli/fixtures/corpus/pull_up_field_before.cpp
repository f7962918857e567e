class Base {
public:
  int tag;
};
class Derived : Base {
public:
  int cache;
};
